//! Exact concurrent flow for tiny instances: every simple path becomes an LP
//! column and the path LP is solved over the rationals.

use num_traits::{ToPrimitive, Zero};

use super::network::{CommoditySet, FlowNetwork};
use super::simplex::{q, q_from_f64, LinearProgram, LpOutcome, Relation, Q};
use super::solution::FlowSolution;
use crate::error::{Error, Result};

pub const EXACT_NODE_LIMIT: usize = 12;
/// Total simple paths allowed across all commodities.
pub const EXACT_PATH_BUDGET: usize = 5_000;

#[derive(Debug, Clone)]
pub struct ExactFlowResult {
    pub lambda: f64,
    pub lambda_exact: Q,
    pub path_count: usize,
    pub solution: FlowSolution,
}

/// Simple `s -> t` paths as arc sequences, over arcs with positive capacity.
/// Fails once more than `budget` paths have been found.
pub fn enumerate_simple_paths(net: &FlowNetwork, s: usize, t: usize, budget: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut on_path = vec![false; net.node_count()];
    let mut arcs = Vec::new();
    on_path[s] = true;
    dfs(net, s, t, &mut on_path, &mut arcs, &mut out, budget)?;
    Ok(out)
}

fn dfs(
    net: &FlowNetwork,
    u: usize,
    t: usize,
    on_path: &mut [bool],
    arcs: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    budget: usize,
) -> Result<()> {
    if u == t {
        if out.len() == budget {
            return Err(Error::PathBudgetExceeded {
                paths: budget + 1,
                limit: budget,
            });
        }
        out.push(arcs.clone());
        return Ok(());
    }
    for &a in net.out_arcs(u) {
        let v = net.arc_head(a);
        if on_path[v] || net.arc_capacity(a) <= 0.0 {
            continue;
        }
        on_path[v] = true;
        arcs.push(a);
        dfs(net, v, t, on_path, arcs, out, budget)?;
        arcs.pop();
        on_path[v] = false;
    }
    Ok(())
}

struct PathLp {
    lp: LinearProgram,
    // (commodity, arcs) per column, offset by `first_path_col`.
    paths: Vec<(usize, Vec<usize>)>,
    first_path_col: usize,
}

fn build_path_lp(net: &FlowNetwork, comm: &CommoditySet, fixed: Option<&Q>) -> Result<PathLp> {
    comm.check(net.node_count())?;
    if net.node_count() > EXACT_NODE_LIMIT {
        return Err(Error::OracleScaleExceeded {
            nodes: net.node_count(),
            limit: EXACT_NODE_LIMIT,
        });
    }
    let mut paths = Vec::new();
    for (j, &(s, t)) in comm.pairs.iter().enumerate() {
        let left = EXACT_PATH_BUDGET - paths.len();
        let found = enumerate_simple_paths(net, s, t, left).map_err(|_| Error::PathBudgetExceeded {
            paths: EXACT_PATH_BUDGET + 1,
            limit: EXACT_PATH_BUDGET,
        })?;
        paths.extend(found.into_iter().map(|p| (j, p)));
    }
    let first_path_col = usize::from(fixed.is_none());
    let mut lp = LinearProgram::new(first_path_col + paths.len());
    for j in 0..comm.len() {
        let mut terms: Vec<(usize, Q)> = paths
            .iter()
            .enumerate()
            .filter(|(_, (pj, _))| *pj == j)
            .map(|(i, _)| (first_path_col + i, q(1)))
            .collect();
        match fixed {
            None => {
                // lambda - sum x_p <= 0
                for t in terms.iter_mut() {
                    t.1 = q(-1);
                }
                terms.push((0, q(1)));
                lp.add(terms, Relation::Le, Q::zero());
            }
            Some(l) => lp.add(terms, Relation::Eq, l.clone()),
        }
    }
    let mut per_link: Vec<Vec<usize>> = vec![Vec::new(); net.link_count()];
    for (i, (_, p)) in paths.iter().enumerate() {
        for &a in p {
            per_link[a / 2].push(first_path_col + i);
        }
    }
    for (k, cols) in per_link.into_iter().enumerate() {
        if !cols.is_empty() {
            let cap = q_from_f64(net.links()[k].capacity);
            lp.add(cols.into_iter().map(|c| (c, q(1))).collect(), Relation::Le, cap);
        }
    }
    if fixed.is_none() {
        lp.objective = vec![(0, q(1))];
    }
    Ok(PathLp {
        lp,
        paths,
        first_path_col,
    })
}

/// Maximum concurrent flow value, solved exactly on the path formulation.
pub fn concurrent_flow_exact(net: &FlowNetwork, comm: &CommoditySet) -> Result<ExactFlowResult> {
    let PathLp {
        lp,
        paths,
        first_path_col,
    } = build_path_lp(net, comm, None)?;
    let LpOutcome::Optimal { value, x } = lp.solve() else {
        unreachable!("the zero flow is feasible and capacities bound the objective")
    };
    // Trim each commodity to exactly lambda so the injections are equal.
    let mut routed = vec![Q::zero(); comm.len()];
    for (i, (j, _)) in paths.iter().enumerate() {
        routed[*j] += &x[first_path_col + i];
    }
    let mut flows: Vec<Vec<f64>> = vec![vec![0.0; net.link_count()]; comm.len()];
    for (i, (j, p)) in paths.iter().enumerate() {
        let xi = &x[first_path_col + i];
        if xi.is_zero() {
            continue;
        }
        let share = (xi * &value / &routed[*j]).to_f64().unwrap_or(0.0);
        for &a in p {
            flows[*j][a / 2] += if a % 2 == 0 { share } else { -share };
        }
    }
    let flows = flows
        .into_iter()
        .map(|f| f.into_iter().enumerate().filter(|(_, v)| *v != 0.0).collect())
        .collect();
    Ok(ExactFlowResult {
        lambda: value.to_f64().unwrap_or(f64::NAN),
        lambda_exact: value,
        path_count: paths.len(),
        solution: FlowSolution::from_flows(net, comm.pairs.clone(), flows),
    })
}

/// Whether every commodity can route `lambda` simultaneously, decided by the
/// first simplex phase alone.
pub fn concurrent_flow_feasible(net: &FlowNetwork, comm: &CommoditySet, lambda: f64) -> Result<bool> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return crate::error::invalid(format!("lambda must be finite and nonnegative, got {lambda}"));
    }
    let l = q_from_f64(lambda);
    Ok(build_path_lp(net, comm, Some(&l))?.lp.is_feasible())
}
