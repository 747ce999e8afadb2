//! Maximum concurrent flow by multiplicative length updates.
//!
//! Each phase routes a fixed amount of every commodity, one augmentation at a
//! time, along a short path under link lengths that grow exponentially with
//! the flow already placed on the link. Paths are cached per commodity and
//! reused while they stay within a factor `1 + slack` of a lower bound on the
//! true distance. Otherwise a search from the source and one from the sink
//! refresh the cache with near-shortest paths through nodes both reached,
//! no two sharing a first or a last arc.
//!
//! Two certified numbers are tracked:
//!
//! * the primal rate: the routed amount divided by the worst link congestion,
//!   so scaling the accumulated flow by it is exactly feasible;
//! * an upper bound: the smaller of `D(l) / alpha(l)`, with
//!   `D(l) = sum_e c_e l_e` and `alpha(l)` the summed commodity distances, and
//!   the capacity around each endpoint divided by the commodities using it.
//!
//! The solver stops once the primal is within `1 - eps` of the bound, or when
//! the phase or work budget runs out, in which case the result is marked
//! uncertified.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::network::{CommoditySet, FlowNetwork};
use super::solution::FlowSolution;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Phase budget; exhausting it returns an uncertified result.
    pub max_phases: usize,
    /// Work budget: shortest-path searches may scan this many times the
    /// number of arcs, checked after every phase. Deterministic, unlike a
    /// time limit.
    pub scans_per_arc: f64,
    /// Relative growth per unit of flow per unit of capacity.
    pub learning_rate: f64,
    /// Cached paths are reused while within this factor of the distance
    /// bound.
    pub slack: f64,
    /// Most cached paths per commodity.
    pub cache_limit: usize,
    /// Paths added per tree refresh.
    pub paths_per_refresh: usize,
    /// Largest gap, in phases, between two upper-bound evaluations.
    pub check_every: usize,
    /// Largest single augmentation, as a multiple of the path bottleneck.
    pub step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_phases: 2000,
            scans_per_arc: f64::INFINITY,
            learning_rate: 1.0,
            slack: 0.1,
            cache_limit: 128,
            paths_per_refresh: 64,
            check_every: 16,
            step: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrentFlowResult {
    /// Rate carried by every commodity in `solution`.
    pub lambda: f64,
    pub epsilon: f64,
    /// Completed phases.
    pub iterations: usize,
    /// Best upper bound found; the optimum lies in `[lambda, upper_bound]`.
    pub upper_bound: f64,
    /// True when `lambda >= (1 - epsilon) * upper_bound`.
    pub certified: bool,
    /// Commodities whose sink is unreachable from their source.
    pub disconnected: Vec<usize>,
    pub solution: FlowSolution,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy)]
struct Entry {
    neighbor: u32,
    arc: u32,
    length: f64,
}

/// Arcs around each node with a copy of their current length, so searches
/// read memory in order. `out` holds the arcs leaving each node and `into`
/// the arcs entering it; a direction without capacity stays infinitely
/// long.
struct Adjacency {
    start: Vec<usize>,
    out: Vec<Entry>,
    into: Vec<Entry>,
    /// Where each link appears in `out` and in `into`.
    slots: Vec<[u32; 4]>,
}

impl Adjacency {
    fn new(net: &FlowNetwork, length: &[f64]) -> Self {
        let mut start = vec![0];
        let mut out = Vec::new();
        let mut into = Vec::new();
        let mut slots = vec![[0u32; 4]; net.links().len()];
        let mut seen = vec![0u8; net.links().len()];
        for u in 0..net.node_count() {
            for &a in net.out_arcs(u) {
                let e = a / 2;
                let neighbor = net.arc_head(a) as u32;
                let usable = |arc: usize| {
                    if net.arc_capacity(arc) > 0.0 {
                        length[e]
                    } else {
                        f64::INFINITY
                    }
                };
                let i = seen[e] as usize;
                slots[e][i] = out.len() as u32;
                slots[e][2 + i] = into.len() as u32;
                seen[e] += 1;
                out.push(Entry {
                    neighbor,
                    arc: a as u32,
                    length: usable(a),
                });
                into.push(Entry {
                    neighbor,
                    arc: (a ^ 1) as u32,
                    length: usable(a ^ 1),
                });
            }
            start.push(out.len());
        }
        Adjacency {
            start,
            out,
            into,
            slots,
        }
    }

    /// Copies a new length of link `e` into its usable entries.
    fn set(&mut self, e: usize, value: f64) {
        let [o1, o2, i1, i2] = self.slots[e];
        for (outgoing, i) in [(true, o1), (true, o2), (false, i1), (false, i2)] {
            let list = if outgoing { &mut self.out } else { &mut self.into };
            let entry = &mut list[i as usize];
            if entry.length.is_finite() {
                entry.length = value;
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        for entry in self.out.iter_mut().chain(self.into.iter_mut()) {
            entry.length *= factor;
        }
    }
}

/// A* searches whose heuristics are distance lower bounds left behind by
/// earlier searches. Link lengths only grow, so an exact distance under old
/// lengths stays a consistent lower bound.
struct Search {
    dist: Vec<f64>,
    pred: Vec<u32>,
    pred_node: Vec<u32>,
    settled: Vec<bool>,
    touched: Vec<usize>,
    heap: BinaryHeap<HeapItem>,
    /// Arcs scanned so far, the unit of the work budget.
    work: u64,
}

impl Search {
    fn new(n: usize) -> Self {
        Search {
            dist: vec![f64::INFINITY; n],
            pred: vec![u32::MAX; n],
            pred_node: vec![u32::MAX; n],
            settled: vec![false; n],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
            work: 0,
        }
    }

    /// Searches from `root` toward `target` along arcs (`forward`) or
    /// against them, with `h` a consistent lower bound on the remaining
    /// distance to `target`. Every node whose key is within `(1 + slack)`
    /// times the distance is settled. Afterwards `potential` is raised to
    /// the distances from `root` that the search proves. Returns the
    /// `root`-`target` distance.
    #[allow(clippy::too_many_arguments)]
    fn run(
        &mut self,
        adj: &Adjacency,
        root: usize,
        target: usize,
        forward: bool,
        h: &[f64],
        slack: f64,
        potential: &mut [f64],
    ) -> Option<f64> {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
            self.pred[v] = u32::MAX;
            self.settled[v] = false;
        }
        self.touched.clear();
        self.heap.clear();
        self.dist[root] = 0.0;
        self.touched.push(root);
        self.heap.push(HeapItem(h[root], root));
        let list = if forward { &adj.out } else { &adj.into };
        let mut bound = f64::INFINITY;
        let mut found = None;
        while let Some(&HeapItem(key, u)) = self.heap.peek() {
            if key > bound {
                break;
            }
            self.heap.pop();
            if self.settled[u] {
                continue;
            }
            self.settled[u] = true;
            let du = self.dist[u];
            if u == target {
                found = Some(du);
                bound = du * (1.0 + slack);
            }
            let arcs = &list[adj.start[u]..adj.start[u + 1]];
            self.work += arcs.len() as u64;
            for entry in arcs {
                let v = entry.neighbor as usize;
                let dv = du + entry.length;
                if dv < self.dist[v] && !self.settled[v] && h[v].is_finite() {
                    if self.dist[v].is_infinite() {
                        self.touched.push(v);
                    }
                    self.dist[v] = dv;
                    self.pred[v] = entry.arc;
                    self.pred_node[v] = u as u32;
                    self.heap.push(HeapItem(dv + h[v], v));
                }
            }
        }
        // Unsettled nodes have key at least `frontier`, hence distance at
        // least `frontier - h`.
        let frontier = self.heap.peek().map_or(f64::INFINITY, |i| i.0);
        for (v, p) in potential.iter_mut().enumerate() {
            let proved = if self.settled[v] {
                self.dist[v]
            } else if frontier.is_finite() && h[v].is_finite() {
                frontier - h[v]
            } else {
                continue;
            };
            if proved > *p {
                *p = proved;
            }
        }
        found
    }

    /// Appends the tree arcs met walking from `v` up to `root`; false when
    /// `v` is not in the tree.
    fn tree_path(&self, root: usize, v: usize, out: &mut Vec<usize>) -> bool {
        let mut w = v;
        while w != root {
            let a = self.pred[w];
            if a == u32::MAX {
                return false;
            }
            out.push(a as usize);
            w = self.pred_node[w] as usize;
        }
        true
    }
}

/// After a forward search from `s` and a reverse search from `t`, lists up
/// to `limit` of the cheapest `s`-`t` paths through a node settled by both
/// searches, within `bound`, such that no two share a first arc or a last
/// arc.
#[allow(clippy::too_many_arguments)]
fn via_candidates(
    net: &FlowNetwork,
    fwd: &Search,
    rev: &Search,
    s: usize,
    t: usize,
    bound: f64,
    limit: usize,
    mark: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let mut vias: Vec<(f64, usize)> = fwd
        .touched
        .iter()
        .copied()
        .filter(|&x| fwd.settled[x] && rev.settled[x])
        .map(|x| (fwd.dist[x] + rev.dist[x], x))
        .filter(|&(len, _)| len <= bound)
        .collect();
    vias.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out.clear();
    let mut first_used: Vec<usize> = Vec::new();
    let mut last_used: Vec<usize> = Vec::new();
    let mut head = Vec::new();
    let mut tail = Vec::new();
    for (_, x) in vias {
        if out.len() == limit {
            break;
        }
        head.clear();
        tail.clear();
        if !fwd.tree_path(s, x, &mut head) || !rev.tree_path(t, x, &mut tail) {
            continue;
        }
        head.reverse();
        let first = head.first().or(tail.first()).copied().expect("s differs from t");
        let last = tail.last().or(head.last()).copied().expect("s differs from t");
        if first_used.contains(&first) || last_used.contains(&last) {
            continue;
        }
        // The two halves may only meet at x.
        let mut simple = true;
        for &a in &head {
            mark[net.arc(a).0] = true;
        }
        for &a in &tail {
            if mark[net.arc_head(a)] {
                simple = false;
            }
        }
        for &a in &head {
            mark[net.arc(a).0] = false;
        }
        if !simple {
            continue;
        }
        first_used.push(first);
        last_used.push(last);
        let mut p = head.clone();
        p.extend_from_slice(&tail);
        out.push(p);
    }
}

/// Commodities whose sink cannot be reached from their source.
fn disconnected_commodities(net: &FlowNetwork, pairs: &[(usize, usize)]) -> Vec<usize> {
    if net.links().iter().all(|l| l.bidirectional) {
        let mut parent: Vec<usize> = (0..net.node_count()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for l in net.links().iter().filter(|l| l.capacity > 0.0) {
            let (a, b) = (find(&mut parent, l.tail), find(&mut parent, l.head));
            parent[a.max(b)] = a.min(b);
        }
        return pairs
            .iter()
            .enumerate()
            .filter(|&(_, &(s, t))| find(&mut parent, s) != find(&mut parent, t))
            .map(|(j, _)| j)
            .collect();
    }
    let mut cache: HashMap<usize, Vec<bool>> = HashMap::new();
    pairs
        .iter()
        .enumerate()
        .filter(|&(_, &(s, t))| !cache.entry(s).or_insert_with(|| net.reachable_from(s))[t])
        .map(|(j, _)| j)
        .collect()
}

/// Capacity around every commodity endpoint divided by the number of
/// commodities starting or ending there: each of them needs `lambda` units of
/// that capacity.
fn endpoint_bound(net: &FlowNetwork, pairs: &[(usize, usize)]) -> f64 {
    let mut uses = vec![0usize; net.node_count()];
    for &(s, t) in pairs {
        uses[s] += 1;
        uses[t] += 1;
    }
    let mut cap = vec![0.0; net.node_count()];
    for l in net.links() {
        cap[l.tail] += l.capacity;
        cap[l.head] += l.capacity;
    }
    (0..net.node_count())
        .filter(|&v| uses[v] > 0)
        .map(|v| cap[v] / uses[v] as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Approximately maximizes the common rate of all commodities. The returned
/// flow is always feasible; when `certified` is set its rate is at least
/// `(1 - eps)` times the optimum.
pub fn concurrent_flow_approx(net: &FlowNetwork, comm: &CommoditySet, eps: f64) -> Result<ConcurrentFlowResult> {
    concurrent_flow_approx_with(net, comm, eps, &SolverOptions::default())
}

struct Cached {
    arcs: Vec<u32>,
    id: Option<usize>,
}

struct CommodityState {
    source: usize,
    sink: usize,
    cache: Vec<Cached>,
    /// Lower bound on the current source-sink distance.
    lower: f64,
    /// Lower bounds on distances from the source and to the sink.
    from_source: Vec<f64>,
    to_sink: Vec<f64>,
}

/// Flow placed on each path that ever carried flow, in total and since the
/// last window restart.
#[derive(Default)]
struct PathFlows {
    owner: Vec<usize>,
    arcs: Vec<Vec<u32>>,
    total: Vec<f64>,
    window: Vec<f64>,
}

fn path_length(arcs: &[u32], length: &[f64]) -> f64 {
    arcs.iter().map(|&a| length[a as usize / 2]).sum()
}

fn congestion(links: &[super::network::Link], load: &[f64]) -> f64 {
    links
        .iter()
        .zip(load)
        .filter(|(_, &f)| f > 0.0)
        .map(|(l, &f)| f / l.capacity)
        .fold(0.0f64, f64::max)
}

pub fn concurrent_flow_approx_with(
    net: &FlowNetwork,
    comm: &CommoditySet,
    eps: f64,
    opts: &SolverOptions,
) -> Result<ConcurrentFlowResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("epsilon must lie in (0, 1), got {eps}"));
    }
    if !(opts.learning_rate > 0.0) || !(opts.slack >= 0.0) || !(opts.scans_per_arc > 0.0) || !(opts.step > 0.0) {
        return invalid("learning rate, step and work budget must be positive and slack non-negative");
    }
    if opts.max_phases == 0 || opts.cache_limit == 0 || opts.paths_per_refresh == 0 || opts.check_every == 0 {
        return invalid("phase budget, cache sizes and check interval must be positive");
    }
    comm.check(net.node_count())?;
    let pairs = &comm.pairs;
    let k = pairs.len();

    let disconnected = disconnected_commodities(net, pairs);
    if !disconnected.is_empty() {
        return Ok(ConcurrentFlowResult {
            lambda: 0.0,
            epsilon: eps,
            iterations: 0,
            upper_bound: 0.0,
            certified: true,
            disconnected,
            solution: FlowSolution::zero(net, pairs),
        });
    }

    let n = net.node_count();
    let links = net.links();
    let mut length: Vec<f64> = links
        .iter()
        .map(|l| {
            if l.capacity > 0.0 {
                1.0 / l.capacity
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut adj = Adjacency::new(net, &length);
    let max_work = opts.scans_per_arc * adj.out.len() as f64;
    let mut load_total = vec![0.0; links.len()];
    let mut load_window = vec![0.0; links.len()];
    let mut flows = PathFlows::default();
    let mut states: Vec<CommodityState> = pairs
        .iter()
        .map(|&(s, t)| CommodityState {
            source: s,
            sink: t,
            cache: Vec::new(),
            lower: 0.0,
            from_source: vec![0.0; n],
            to_sink: vec![0.0; n],
        })
        .collect();
    let mut search = Search::new(n);
    let mut back = Search::new(n);
    let mut mark = vec![false; n];
    let mut found = Vec::new();

    // Exact distances for every commodity; also tightens the heuristics.
    let dual_bound = |search: &mut Search, adj: &Adjacency, length: &[f64], states: &mut [CommodityState]| -> f64 {
        let mut alpha = 0.0;
        for st in states.iter_mut() {
            let d = search
                .run(adj, st.source, st.sink, true, &st.to_sink, 0.0, &mut st.from_source)
                .expect("connectivity checked above");
            st.lower = st.lower.max(d);
            alpha += d;
        }
        let volume: f64 = links
            .iter()
            .zip(length)
            .filter(|(l, le)| l.capacity > 0.0 && le.is_finite())
            .map(|(l, le)| l.capacity * le)
            .sum();
        volume / alpha
    };
    let mut upper = endpoint_bound(net, pairs).min(dual_bound(&mut search, &adj, &length, &mut states));

    let mut routed_total = 0.0;
    let mut routed_window = 0.0;
    let mut lambda: f64 = 0.0;
    let mut use_window = false;
    let mut phases = 0;
    let mut next_check = 1;
    let mut next_restart = 4;
    let mut certified = false;
    while phases < opts.max_phases {
        if phases == next_restart {
            load_window.iter_mut().for_each(|f| *f = 0.0);
            flows.window.iter_mut().for_each(|f| *f = 0.0);
            routed_window = 0.0;
            next_restart *= 2;
        }
        let demand = lambda.max(0.5 * upper);
        for (j, st) in states.iter_mut().enumerate() {
            let mut rem = demand;
            while rem > 0.0 {
                let mut best = cheapest(&st.cache, &length);
                if best.is_none_or(|(_, len)| len > (1.0 + opts.slack) * st.lower) {
                    let (src, dst) = (st.source, st.sink);
                    let d = search
                        .run(&adj, src, dst, true, &st.to_sink, opts.slack, &mut st.from_source)
                        .expect("connectivity checked above");
                    back.run(&adj, dst, src, false, &st.from_source, opts.slack, &mut st.to_sink);
                    st.lower = st.lower.max(d);
                    let bound = d * (1.0 + opts.slack);
                    via_candidates(
                        net,
                        &search,
                        &back,
                        src,
                        dst,
                        bound,
                        opts.paths_per_refresh,
                        &mut mark,
                        &mut found,
                    );
                    for p in found.drain(..) {
                        let p: Vec<u32> = p.into_iter().map(|a| a as u32).collect();
                        if !st.cache.iter().any(|c| c.arcs == p) {
                            st.cache.push(Cached { arcs: p, id: None });
                        }
                    }
                    if st.cache.len() > opts.cache_limit {
                        let mut keyed: Vec<(f64, usize)> = st
                            .cache
                            .iter()
                            .enumerate()
                            .map(|(i, c)| (path_length(&c.arcs, &length), i))
                            .collect();
                        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                        let mut keep = vec![false; st.cache.len()];
                        for &(_, i) in keyed.iter().take(opts.cache_limit) {
                            keep[i] = true;
                        }
                        let mut i = 0;
                        st.cache.retain(|_| {
                            i += 1;
                            keep[i - 1]
                        });
                    }
                    best = cheapest(&st.cache, &length);
                }
                let (slot, _) = best.expect("refresh yields a path");
                let entry = &mut st.cache[slot];
                let u = entry
                    .arcs
                    .iter()
                    .map(|&a| links[a as usize / 2].capacity * opts.step)
                    .fold(rem, f64::min);
                let id = *entry.id.get_or_insert_with(|| {
                    flows.owner.push(j);
                    flows.arcs.push(entry.arcs.clone());
                    flows.total.push(0.0);
                    flows.window.push(0.0);
                    flows.arcs.len() - 1
                });
                for &a in &entry.arcs {
                    let e = a as usize / 2;
                    load_total[e] += u;
                    load_window[e] += u;
                    length[e] *= (opts.learning_rate * u / links[e].capacity).exp();
                    adj.set(e, length[e]);
                }
                flows.total[id] += u;
                flows.window[id] += u;
                rem -= u;
            }
        }
        routed_total += demand;
        routed_window += demand;
        phases += 1;

        let lambda_total = routed_total / congestion(links, &load_total);
        let lambda_window = routed_window / congestion(links, &load_window);
        use_window = lambda_window > lambda_total;
        lambda = lambda_total.max(lambda_window);

        let top = length.iter().copied().filter(|l| l.is_finite()).fold(0.0f64, f64::max);
        if top > 1e200 {
            length.iter_mut().for_each(|l| *l *= 1e-200);
            adj.scale(1e-200);
            for st in states.iter_mut() {
                st.lower *= 1e-200;
                st.from_source.iter_mut().for_each(|p| *p *= 1e-200);
                st.to_sink.iter_mut().for_each(|p| *p *= 1e-200);
            }
        }

        let exhausted = (search.work + back.work) as f64 >= max_work;
        if phases == next_check || phases == opts.max_phases || exhausted {
            upper = upper.min(dual_bound(&mut search, &adj, &length, &mut states));
            next_check = phases + opts.check_every.min(phases);
            if lambda >= (1.0 - eps) * upper {
                certified = true;
                break;
            }
            if exhausted {
                break;
            }
        }
    }

    // Scale the chosen accumulator to the worst link, with a hair of margin
    // so rounding cannot push a link over capacity.
    let (amounts, routed) = if use_window {
        (&flows.window, routed_window)
    } else {
        (&flows.total, routed_total)
    };
    let scale = lambda / routed * (1.0 - 1e-12);
    let mut per: Vec<HashMap<usize, f64>> = vec![HashMap::new(); k];
    for (id, arcs) in flows.arcs.iter().enumerate() {
        let w = amounts[id] * scale;
        if w <= 0.0 {
            continue;
        }
        let j = flows.owner[id];
        for &a in arcs {
            let a = a as usize;
            *per[j].entry(a / 2).or_insert(0.0) += if a.is_multiple_of(2) { w } else { -w };
        }
    }
    let per = per
        .into_iter()
        .map(|m| {
            let mut v: Vec<(usize, f64)> = m.into_iter().filter(|&(_, f)| f != 0.0).collect();
            v.sort_by_key(|&(e, _)| e);
            v
        })
        .collect();
    let solution = FlowSolution::from_flows(net, pairs.clone(), per);
    let lambda = solution.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConcurrentFlowResult {
        lambda,
        epsilon: eps,
        iterations: phases,
        upper_bound: upper,
        certified: certified && lambda >= (1.0 - eps) * upper,
        disconnected: Vec::new(),
        solution,
    })
}

fn cheapest(cache: &[Cached], length: &[f64]) -> Option<(usize, f64)> {
    cache
        .iter()
        .enumerate()
        .map(|(i, c)| (i, path_length(&c.arcs, length)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}
