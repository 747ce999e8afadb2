//! Exact single-commodity maximum flow by blocking flows on level graphs
//! (Dinic), with a super-source and super-sink for multi-terminal problems.

use std::collections::VecDeque;

use super::network::FlowNetwork;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlowResult {
    pub value: f64,
    /// Capacity of the returned cut; equals `value` for an optimal flow.
    pub cut_capacity: f64,
    /// Links with an arc leaving the source side of the cut.
    pub cut_links: Vec<usize>,
    /// Membership of each original node in the source side.
    pub source_side: Vec<bool>,
    /// Net flow on each link, positive in the tail-to-head direction.
    pub link_flows: Vec<f64>,
}

struct Residual {
    head: Vec<usize>,
    res: Vec<f64>,
    first_out: Vec<usize>,
    out: Vec<usize>,
}

impl Residual {
    fn build(node_count: usize, arcs: &[(usize, usize, f64, f64)]) -> Self {
        let mut head = Vec::with_capacity(2 * arcs.len());
        let mut res = Vec::with_capacity(2 * arcs.len());
        let mut deg = vec![0usize; node_count + 1];
        for &(u, v, c_fwd, c_rev) in arcs {
            head.push(v);
            res.push(c_fwd);
            head.push(u);
            res.push(c_rev);
            deg[u] += 1;
            deg[v] += 1;
        }
        let mut first_out = vec![0usize; node_count + 1];
        for v in 0..node_count {
            first_out[v + 1] = first_out[v] + deg[v];
        }
        let mut fill = first_out.clone();
        let mut out = vec![0usize; 2 * arcs.len()];
        for (k, &(u, v, _, _)) in arcs.iter().enumerate() {
            out[fill[u]] = 2 * k;
            fill[u] += 1;
            out[fill[v]] = 2 * k + 1;
            fill[v] += 1;
        }
        Residual {
            head,
            res,
            first_out,
            out,
        }
    }

    fn arcs_of(&self, v: usize) -> &[usize] {
        &self.out[self.first_out[v]..self.first_out[v + 1]]
    }
}

struct Dinic<'a> {
    g: &'a mut Residual,
    level: Vec<i64>,
    next: Vec<usize>,
    eps: f64,
}

impl Dinic<'_> {
    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in self.g.arcs_of(u) {
                let v = self.g.head[a];
                if self.level[v] < 0 && self.g.res[a] > self.eps {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, limit: f64) -> f64 {
        if u == t {
            return limit;
        }
        let start = self.g.first_out[u];
        let end = self.g.first_out[u + 1];
        while self.next[u] < end - start {
            let a = self.g.out[start + self.next[u]];
            let v = self.g.head[a];
            if self.g.res[a] > self.eps && self.level[v] == self.level[u] + 1 {
                let pushed = self.dfs(v, t, limit.min(self.g.res[a]));
                if pushed > 0.0 {
                    self.g.res[a] -= pushed;
                    self.g.res[a ^ 1] += pushed;
                    return pushed;
                }
            }
            self.next[u] += 1;
        }
        0.0
    }
}

/// Maximum flow from the node set `sources` to the node set `sinks`, with a
/// minimum cut certifying optimality.
pub fn max_flow(net: &FlowNetwork, sources: &[usize], sinks: &[usize]) -> Result<MaxFlowResult> {
    let n = net.node_count();
    if sources.is_empty() || sinks.is_empty() {
        return invalid("source and sink sets must be nonempty");
    }
    let mut is_source = vec![false; n];
    for &s in sources {
        if s >= n {
            return invalid(format!("source {s} is out of range"));
        }
        is_source[s] = true;
    }
    for &t in sinks {
        if t >= n {
            return invalid(format!("sink {t} is out of range"));
        }
        if is_source[t] {
            return invalid(format!("node {t} is both a source and a sink"));
        }
    }

    let (super_s, super_t) = (n, n + 1);
    let mut arcs: Vec<(usize, usize, f64, f64)> = (0..net.link_count())
        .map(|k| {
            let (u, v, c) = net.arc(2 * k);
            (u, v, c, net.arc_capacity(2 * k + 1))
        })
        .collect();
    for &s in sources {
        arcs.push((super_s, s, f64::INFINITY, 0.0));
    }
    for &t in sinks {
        arcs.push((t, super_t, f64::INFINITY, 0.0));
    }
    let max_cap = net.links().iter().map(|l| l.capacity).fold(0.0f64, f64::max);
    let mut g = Residual::build(n + 2, &arcs);
    let mut dinic = Dinic {
        g: &mut g,
        level: vec![-1; n + 2],
        next: vec![0; n + 2],
        eps: 1e-12 * max_cap.max(1e-300),
    };
    let mut value = 0.0;
    while dinic.bfs(super_s, super_t) {
        dinic.next.iter_mut().for_each(|x| *x = 0);
        loop {
            let pushed = dinic.dfs(super_s, super_t, f64::INFINITY);
            if pushed <= 0.0 {
                break;
            }
            value += pushed;
        }
    }

    // Source side: residual reachability from the super-source.
    let eps = dinic.eps;
    let mut side = vec![false; n + 2];
    side[super_s] = true;
    let mut stack = vec![super_s];
    while let Some(u) = stack.pop() {
        for &a in g.arcs_of(u) {
            let v = g.head[a];
            if !side[v] && g.res[a] > eps {
                side[v] = true;
                stack.push(v);
            }
        }
    }

    let mut cut_links = Vec::new();
    let mut cut_capacity = 0.0;
    let mut link_flows = Vec::with_capacity(net.link_count());
    for k in 0..net.link_count() {
        let (u, v, c_fwd) = net.arc(2 * k);
        let c_rev = net.arc_capacity(2 * k + 1);
        link_flows.push(c_fwd - g.res[2 * k]);
        let crossing = if side[u] && !side[v] {
            c_fwd
        } else if side[v] && !side[u] {
            c_rev
        } else {
            0.0
        };
        if crossing > 0.0 {
            cut_links.push(k);
            cut_capacity += crossing;
        }
    }
    side.truncate(n);
    Ok(MaxFlowResult {
        value,
        cut_capacity,
        cut_links,
        source_side: side,
        link_flows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_has_unit_flow() {
        let net = FlowNetwork::directed(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let r = max_flow(&net, &[0], &[2]).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.cut_capacity, 1.0);
    }

    #[test]
    fn diamond() {
        // s=0, a=1, b=2, t=3. Cuts: {s}:3, {s,a}:2, {s,b}:3, {s,a,b}:3.
        let net = FlowNetwork::directed(4, &[(0, 1, 2.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 2.0)]).unwrap();
        let r = max_flow(&net, &[0], &[3]).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.cut_capacity, 2.0);
        assert_eq!(r.source_side, vec![true, true, false, false]);
    }

    #[test]
    fn undirected_edges_carry_either_way() {
        let net = FlowNetwork::undirected(3, &[(1, 0, 1.0), (2, 1, 1.0)]).unwrap();
        let r = max_flow(&net, &[0], &[2]).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.link_flows, vec![-1.0, -1.0]);
    }

    #[test]
    fn multi_terminal() {
        let net = FlowNetwork::undirected(4, &[(0, 2, 1.0), (1, 3, 1.0), (0, 3, 1.0)]).unwrap();
        let r = max_flow(&net, &[0, 1], &[2, 3]).unwrap();
        assert_eq!(r.value, 3.0);
    }

    #[test]
    fn rejects_bad_terminals() {
        let net = FlowNetwork::undirected(2, &[(0, 1, 1.0)]).unwrap();
        assert!(max_flow(&net, &[], &[1]).is_err());
        assert!(max_flow(&net, &[0], &[]).is_err());
        assert!(max_flow(&net, &[0], &[0]).is_err());
    }
}
