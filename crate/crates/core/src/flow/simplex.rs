//! Dense two-phase primal simplex over exact rationals: largest reduced
//! cost pricing, with Bland's rule after a run of degenerate pivots.
//! Sized for oracle problems of a few dozen rows.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// A sparse row `sum coef * x[var] (relation) rhs`.
pub type Constraint = (Vec<(usize, Q)>, Relation, Q);

/// `maximize objective . x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<(usize, Q)>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

pub fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Exact rational value of a finite float.
pub fn q_from_f64(v: f64) -> Q {
    Q::from_float(v).expect("finite value")
}

struct Tableau {
    // rows[i] has width cols + 1; the last entry is the right-hand side.
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    cols: usize,
}

/// Consecutive degenerate pivots after which pricing falls back from the
/// largest reduced cost to Bland's rule, which cannot cycle.
const DEGENERATE_STREAK: usize = 8;

impl Tableau {
    /// Pivots on `(r, c)`, updating `obj` (the reduced-cost row) along with
    /// the constraint rows. Only nonzero entries of the pivot row are touched.
    fn pivot(&mut self, r: usize, c: usize, obj: Option<&mut Vec<Q>>) {
        let inv = self.rows[r][c].recip();
        let mut support = Vec::new();
        for (j, v) in self.rows[r].iter_mut().enumerate() {
            if !v.is_zero() {
                *v *= &inv;
                support.push(j);
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let eliminate = |row: &mut Vec<Q>| {
            if row[c].is_zero() {
                return;
            }
            let f = row[c].clone();
            for &j in &support {
                row[j] -= &f * &pivot_row[j];
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        if let Some(obj) = obj {
            eliminate(obj);
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Maximizes `cost . x` over the columns allowed by `allowed`. Returns
    /// false when unbounded.
    fn optimize(&mut self, cost: &[Q], allowed: &dyn Fn(usize) -> bool) -> bool {
        // Reduced costs cost_j - sum_i cost_{basis i} a_ij, kept up to date
        // by the pivots.
        let mut obj: Vec<Q> = cost.iter().cloned().chain(std::iter::once(Q::zero())).collect();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (o, a) in obj.iter_mut().zip(row) {
                if !a.is_zero() {
                    *o -= cb * a;
                }
            }
        }
        let mut streak = 0;
        loop {
            let candidates = (0..self.cols).filter(|&j| allowed(j) && obj[j].is_positive());
            let entering = if streak >= DEGENERATE_STREAK {
                candidates.min()
            } else {
                candidates.fold(None, |best: Option<usize>, j| match best {
                    Some(b) if obj[b] >= obj[j] => Some(b),
                    _ => Some(j),
                })
            };
            let Some(c) = entering else { return true };
            let mut leaving: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.cols] / &row[c];
                    let better = match &leaving {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leaving else { return false };
            streak = if ratio.is_zero() { streak + 1 } else { 0 };
            self.pivot(r, c, Some(&mut obj));
        }
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            ..Default::default()
        }
    }

    pub fn add(&mut self, terms: Vec<(usize, Q)>, rel: Relation, rhs: Q) {
        self.constraints.push((terms, rel, rhs));
    }

    fn tableau(&self) -> (Tableau, usize) {
        let m = self.constraints.len();
        let n = self.num_vars;
        // Column layout: structural | slack/surplus (one per row) | artificial (one per row).
        let cols = n + 2 * m;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        for (i, (terms, rel, rhs)) in self.constraints.iter().enumerate() {
            let mut row = vec![Q::zero(); cols + 1];
            let flip = rhs.is_negative();
            let sign = if flip { -Q::one() } else { Q::one() };
            for (j, a) in terms {
                row[*j] += a * &sign;
            }
            row[cols] = rhs * &sign;
            let rel = match (rel, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => *r,
            };
            match rel {
                Relation::Le => {
                    row[n + i] = Q::one();
                    basis.push(n + i);
                }
                Relation::Ge => {
                    row[n + i] = -Q::one();
                    row[n + m + i] = Q::one();
                    basis.push(n + m + i);
                }
                Relation::Eq => {
                    row[n + m + i] = Q::one();
                    basis.push(n + m + i);
                }
            }
            rows.push(row);
        }
        (Tableau { rows, basis, cols }, n + m)
    }

    /// Phase one only: is the feasible region nonempty?
    pub fn is_feasible(&self) -> bool {
        let (mut t, first_art) = self.tableau();
        phase_one(&mut t, first_art)
    }

    pub fn solve(&self) -> LpOutcome {
        let (mut t, first_art) = self.tableau();
        if !phase_one(&mut t, first_art) {
            return LpOutcome::Infeasible;
        }
        let mut cost = vec![Q::zero(); t.cols];
        for (j, c) in &self.objective {
            cost[*j] += c;
        }
        if !t.optimize(&cost, &|j| j < first_art) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Q::zero(); self.num_vars];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = t.rows[i][t.cols].clone();
            }
        }
        let value = self.objective.iter().fold(Q::zero(), |acc, (j, c)| acc + c * &x[*j]);
        LpOutcome::Optimal { value, x }
    }
}

fn phase_one(t: &mut Tableau, first_art: usize) -> bool {
    let mut cost = vec![Q::zero(); t.cols];
    for c in cost.iter_mut().skip(first_art) {
        *c = -Q::one();
    }
    t.optimize(&cost, &|_| true);
    let infeasible = t
        .basis
        .iter()
        .enumerate()
        .any(|(i, &b)| b >= first_art && !t.rows[i][t.cols].is_zero());
    if infeasible {
        return false;
    }
    // Drive zero-valued artificials out of the basis where possible.
    for i in 0..t.rows.len() {
        if t.basis[i] >= first_art {
            if let Some(c) = (0..first_art).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, c, None);
            }
        }
    }
    true
}
