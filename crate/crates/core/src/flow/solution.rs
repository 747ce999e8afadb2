use super::network::FlowNetwork;
use crate::error::{invalid, Result};

/// Absolute tolerance for feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Per-commodity net link flows for a concurrent flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub commodities: Vec<(usize, usize)>,
    /// For each commodity, `(link, net flow)` sorted by link; positive flow
    /// runs from the link's tail to its head.
    pub flows: Vec<Vec<(usize, f64)>>,
    /// Net supply injected at each commodity's source.
    pub lambdas: Vec<f64>,
    /// Summed absolute commodity flow per link.
    pub utilization: Vec<f64>,
}

impl FlowSolution {
    pub fn zero(net: &FlowNetwork, commodities: &[(usize, usize)]) -> Self {
        FlowSolution {
            commodities: commodities.to_vec(),
            flows: vec![Vec::new(); commodities.len()],
            lambdas: vec![0.0; commodities.len()],
            utilization: vec![0.0; net.link_count()],
        }
    }

    /// Builds a solution from per-commodity flows, deriving the injected
    /// values and the utilization.
    pub fn from_flows(net: &FlowNetwork, commodities: Vec<(usize, usize)>, flows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut utilization = vec![0.0; net.link_count()];
        let mut lambdas = Vec::with_capacity(flows.len());
        for (j, fl) in flows.iter().enumerate() {
            let s = commodities[j].0;
            let mut out = 0.0;
            for &(k, f) in fl {
                utilization[k] += f.abs();
                let l = &net.links()[k];
                if l.tail == s {
                    out += f;
                } else if l.head == s {
                    out -= f;
                }
            }
            lambdas.push(out);
        }
        FlowSolution {
            commodities,
            flows,
            lambdas,
            utilization,
        }
    }

    /// Common injected value, or `None` when the commodities disagree.
    pub fn lambda(&self) -> Option<f64> {
        let first = *self.lambdas.first()?;
        self.lambdas
            .iter()
            .all(|&l| (l - first).abs() <= FEASIBILITY_TOL)
            .then_some(first)
    }

    /// Summed utilization of each undirected node pair, as `(u, v, load)`
    /// with `u < v`, skipping idle links.
    pub fn edge_loads(&self, net: &FlowNetwork) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<(usize, usize, f64)> = net
            .links()
            .iter()
            .zip(&self.utilization)
            .filter(|(_, &u)| u > 0.0)
            .map(|(l, &u)| (l.tail.min(l.head), l.tail.max(l.head), u))
            .collect();
        out.sort_by_key(|a| (a.0, a.1));
        out
    }
}

/// Checks conservation, capacity, direction, and fairness within
/// [`FEASIBILITY_TOL`].
pub fn verify_solution(sol: &FlowSolution, net: &FlowNetwork) -> Result<bool> {
    let k = sol.commodities.len();
    if sol.flows.len() != k || sol.lambdas.len() != k {
        return invalid("solution has inconsistent commodity counts");
    }
    if sol.utilization.len() != net.link_count() {
        return invalid(format!(
            "solution covers {} links, network has {}",
            sol.utilization.len(),
            net.link_count()
        ));
    }
    let n = net.node_count();
    for &(s, t) in &sol.commodities {
        if s >= n || t >= n {
            return invalid("commodity endpoint out of range");
        }
    }
    for fl in &sol.flows {
        if fl.iter().any(|&(e, _)| e >= net.link_count()) {
            return invalid("flow references a link out of range");
        }
    }

    let tol = FEASIBILITY_TOL;
    let mut used = vec![0.0; net.link_count()];
    let mut excess = vec![0.0; n];
    for (j, fl) in sol.flows.iter().enumerate() {
        let (s, t) = sol.commodities[j];
        let mut touched = Vec::with_capacity(2 * fl.len());
        for &(e, f) in fl {
            let l = &net.links()[e];
            if !f.is_finite() || (!l.bidirectional && f < -tol) {
                return Ok(false);
            }
            used[e] += f.abs();
            excess[l.tail] -= f;
            excess[l.head] += f;
            touched.push(l.tail);
            touched.push(l.head);
        }
        touched.push(s);
        touched.push(t);
        let mut ok = true;
        for &v in &touched {
            let expected = if v == s {
                -sol.lambdas[j]
            } else if v == t {
                sol.lambdas[j]
            } else {
                0.0
            };
            if (excess[v] - expected).abs() > tol {
                ok = false;
            }
        }
        for &v in &touched {
            excess[v] = 0.0;
        }
        if !ok {
            return Ok(false);
        }
    }
    for (e, l) in net.links().iter().enumerate() {
        if used[e] > l.capacity + tol {
            return Ok(false);
        }
        if (used[e] - sol.utilization[e]).abs() > tol {
            return Ok(false);
        }
    }
    Ok(sol.lambda().is_some())
}
