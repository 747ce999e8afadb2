use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{NetworkInstance, UnitDiskGraph};

/// One capacitated link. A bidirectional link models an undirected edge: its
/// capacity is shared by traffic in both directions. A directed link only
/// admits flow from `tail` to `head`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub tail: usize,
    pub head: usize,
    pub capacity: f64,
    pub bidirectional: bool,
}

/// Capacitated network. Link `k` expands into arcs `2k` (tail to head) and
/// `2k + 1` (head to tail); the second has zero capacity when the link is
/// directed, so the arc list always contains the reverse of every arc.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    node_count: usize,
    links: Vec<Link>,
    // CSR over arcs, keyed by arc tail.
    first_out: Vec<usize>,
    out_arcs: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(node_count: usize, links: Vec<Link>) -> Result<Self> {
        for (k, l) in links.iter().enumerate() {
            if l.tail >= node_count || l.head >= node_count {
                return invalid(format!("link {k} references a node out of range"));
            }
            if l.tail == l.head {
                return invalid(format!("link {k} is a self-loop"));
            }
            if !(l.capacity >= 0.0) {
                return invalid(format!("link {k} has negative capacity"));
            }
        }
        let mut degree = vec![0usize; node_count + 1];
        for l in &links {
            degree[l.tail] += 1;
            degree[l.head] += 1;
        }
        let mut first_out = vec![0usize; node_count + 1];
        for v in 0..node_count {
            first_out[v + 1] = first_out[v] + degree[v];
        }
        let mut fill = first_out.clone();
        let mut out_arcs = vec![0usize; 2 * links.len()];
        for (k, l) in links.iter().enumerate() {
            out_arcs[fill[l.tail]] = 2 * k;
            fill[l.tail] += 1;
            out_arcs[fill[l.head]] = 2 * k + 1;
            fill[l.head] += 1;
        }
        Ok(FlowNetwork {
            node_count,
            links,
            first_out,
            out_arcs,
        })
    }

    /// Every undirected edge of `g` becomes a bidirectional link of capacity `c`.
    pub fn from_graph(g: &UnitDiskGraph) -> Self {
        let links = g
            .edges
            .iter()
            .map(|&(u, v)| Link {
                tail: u,
                head: v,
                capacity: g.capacity,
                bidirectional: true,
            })
            .collect();
        FlowNetwork::new(g.node_count, links).expect("unit-disk graph is well formed")
    }

    pub fn undirected(node_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let links = edges
            .iter()
            .map(|&(tail, head, capacity)| Link {
                tail,
                head,
                capacity,
                bidirectional: true,
            })
            .collect();
        FlowNetwork::new(node_count, links)
    }

    pub fn directed(node_count: usize, arcs: &[(usize, usize, f64)]) -> Result<Self> {
        let links = arcs
            .iter()
            .map(|&(tail, head, capacity)| Link {
                tail,
                head,
                capacity,
                bidirectional: false,
            })
            .collect();
        FlowNetwork::new(node_count, links)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn arc_count(&self) -> usize {
        2 * self.links.len()
    }

    /// `(tail, head, capacity)` of arc `a`.
    #[inline]
    pub fn arc(&self, a: usize) -> (usize, usize, f64) {
        let l = &self.links[a / 2];
        if a.is_multiple_of(2) {
            (l.tail, l.head, l.capacity)
        } else {
            (l.head, l.tail, if l.bidirectional { l.capacity } else { 0.0 })
        }
    }

    #[inline]
    pub fn arc_head(&self, a: usize) -> usize {
        let l = &self.links[a / 2];
        if a.is_multiple_of(2) {
            l.head
        } else {
            l.tail
        }
    }

    #[inline]
    pub fn arc_capacity(&self, a: usize) -> f64 {
        self.arc(a).2
    }

    /// Arcs leaving `v`, including zero-capacity reverses of directed links.
    #[inline]
    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out_arcs[self.first_out[v]..self.first_out[v + 1]]
    }

    /// Nodes reachable from `s` over arcs with positive capacity.
    pub fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &a in self.out_arcs(u) {
                let v = self.arc_head(a);
                if !seen[v] && self.arc_capacity(a) > 0.0 {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Commodities for a concurrent flow problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommoditySet {
    pub pairs: Vec<(usize, usize)>,
    /// True when the set was restricted to left-to-right pairs.
    pub left_to_right_only: bool,
}

impl CommoditySet {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        CommoditySet {
            pairs,
            left_to_right_only: false,
        }
    }

    /// All commodities of `inst`, or only those with source at x < 1/2 and
    /// sink at x >= 1/2 when `left_to_right_only` is set.
    pub fn from_instance(inst: &NetworkInstance, left_to_right_only: bool) -> Self {
        let pairs = if left_to_right_only {
            inst.left_to_right()
        } else {
            inst.commodities.clone()
        };
        CommoditySet {
            pairs,
            left_to_right_only,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub(crate) fn check(&self, node_count: usize) -> Result<()> {
        if self.pairs.is_empty() {
            return invalid("commodity set is empty");
        }
        for (k, &(s, t)) in self.pairs.iter().enumerate() {
            if s >= node_count || t >= node_count {
                return invalid(format!("commodity {k} references a node out of range"));
            }
            if s == t {
                return invalid(format!("commodity {k} has identical source and sink"));
            }
        }
        Ok(())
    }
}
