//! Random networks on the unit square, unit-disk graphs and the geometry of
//! the vertical center cut at x = 1/2.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{self, Stream};

/// Abscissa of the center cut.
pub const CUT_X: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_left(&self) -> bool {
        self.x < CUT_X
    }
}

/// Closed-disk adjacency rule shared by every component that decides edges.
#[inline]
pub fn within_range(p: &Point, q: &Point, d: f64) -> bool {
    p.dist2(q) <= d * d
}

/// Selector for the divergent term added to `ln n` in the connectivity radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum XiMode {
    /// `ln ln n`.
    #[default]
    LogLog,
    /// A fixed non-negative constant.
    Constant(f64),
    /// The value that makes the radius equal to the routing-grid range
    /// `sqrt(5) / m` with `m = cells_per_side(n, c_grid)`, so that every pair
    /// of nodes in 4-adjacent grid cells is linked.
    Grid(f64),
}

impl XiMode {
    pub fn value(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return invalid(format!("n must be at least 2, got {n}"));
        }
        let nf = n as f64;
        let xi = match *self {
            XiMode::LogLog => {
                let ll = nf.ln();
                if ll <= 1.0 {
                    return invalid(format!("ln ln n is negative or undefined for n = {n}"));
                }
                ll.ln()
            }
            XiMode::Constant(c) => c,
            XiMode::Grid(c_grid) => {
                let m = cells_per_side(n, c_grid)?;
                5.0 * PI * nf / (m as f64 * m as f64) - nf.ln()
            }
        };
        if !(xi >= 0.0) || !xi.is_finite() {
            return invalid(format!("xi_n must be finite and non-negative, got {xi}"));
        }
        Ok(xi)
    }
}

impl std::fmt::Display for XiMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            XiMode::LogLog => write!(f, "loglog"),
            XiMode::Constant(c) => write!(f, "const:{c}"),
            XiMode::Grid(c) => write!(f, "grid:{c}"),
        }
    }
}

impl std::str::FromStr for XiMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || crate::Error::InvalidArgument(format!("unknown xi mode {s:?}"));
        if s == "loglog" {
            return Ok(XiMode::LogLog);
        }
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let value: f64 = value.parse().map_err(|_| bad())?;
        match kind {
            "const" => Ok(XiMode::Constant(value)),
            "grid" => Ok(XiMode::Grid(value)),
            _ => Err(bad()),
        }
    }
}

/// Grid cells per side, `round(sqrt(n / (c_grid ln n)))`.
pub fn cells_per_side(n: usize, c_grid: f64) -> Result<usize> {
    if n < 2 {
        return invalid(format!("n must be at least 2, got {n}"));
    }
    if !(c_grid > 0.0) || !c_grid.is_finite() {
        return invalid(format!("c_grid must be positive, got {c_grid}"));
    }
    let nf = n as f64;
    Ok((nf / (c_grid * nf.ln())).sqrt().round() as usize)
}

/// Transmission radius that keeps the random graph connected:
/// `pi d^2 = (ln n + xi_n) / n`.
pub fn connectivity_radius(n: usize, xi_mode: XiMode) -> Result<f64> {
    let xi = xi_mode.value(n)?;
    let nf = n as f64;
    Ok(((nf.ln() + xi) / (PI * nf)).sqrt())
}

/// Serialized as the network file format: `xi_mode` as its textual form,
/// `nodes` as `[x, y]` pairs and `commodities` as `[s, t]` pairs. Decoding
/// runs `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NetworkFile", try_from = "NetworkFile")]
pub struct NetworkInstance {
    pub n: usize,
    pub d: f64,
    pub seed: u64,
    pub xi_mode: XiMode,
    pub nodes: Vec<Point>,
    pub commodities: Vec<(usize, usize)>,
}

impl NetworkInstance {
    /// Checks every structural invariant. The radius must match
    /// `connectivity_radius(n, xi_mode)` to within 1e-12 relative.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.n {
            return invalid(format!("expected {} nodes, found {}", self.n, self.nodes.len()));
        }
        if let Some(i) = self.nodes.iter().position(|p| !p.in_unit_square()) {
            return invalid(format!("node {i} lies outside the unit square"));
        }
        if self.commodities.len() != self.n {
            return invalid(format!(
                "expected {} commodities, found {}",
                self.n,
                self.commodities.len()
            ));
        }
        let mut as_source = vec![false; self.n];
        let mut as_sink = vec![false; self.n];
        for (k, &(s, t)) in self.commodities.iter().enumerate() {
            if s >= self.n || t >= self.n {
                return invalid(format!("commodity {k} references a node out of range"));
            }
            if s == t {
                return invalid(format!("commodity {k} pairs node {s} with itself"));
            }
            if std::mem::replace(&mut as_source[s], true) {
                return invalid(format!("node {s} is the source of two commodities"));
            }
            if std::mem::replace(&mut as_sink[t], true) {
                return invalid(format!("node {t} is the sink of two commodities"));
            }
        }
        let expected = connectivity_radius(self.n, self.xi_mode)?;
        if (self.d - expected).abs() > 1e-12 * expected {
            return invalid(format!(
                "radius {} is inconsistent with n = {} and xi mode {}; expected {}",
                self.d, self.n, self.xi_mode, expected
            ));
        }
        Ok(())
    }

    /// Commodities whose source lies left of the cut and sink on or right of it.
    pub fn left_to_right(&self) -> Vec<(usize, usize)> {
        self.commodities
            .iter()
            .copied()
            .filter(|&(s, t)| self.nodes[s].is_left() && !self.nodes[t].is_left())
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n: usize,
    d: f64,
    seed: u64,
    xi_mode: String,
    nodes: Vec<[f64; 2]>,
    commodities: Vec<[usize; 2]>,
}

impl From<NetworkInstance> for NetworkFile {
    fn from(inst: NetworkInstance) -> Self {
        NetworkFile {
            n: inst.n,
            d: inst.d,
            seed: inst.seed,
            xi_mode: inst.xi_mode.to_string(),
            nodes: inst.nodes.iter().map(|p| [p.x, p.y]).collect(),
            commodities: inst.commodities.iter().map(|&(s, t)| [s, t]).collect(),
        }
    }
}

impl TryFrom<NetworkFile> for NetworkInstance {
    type Error = crate::Error;

    fn try_from(f: NetworkFile) -> Result<Self> {
        let inst = NetworkInstance {
            n: f.n,
            d: f.d,
            seed: f.seed,
            xi_mode: f.xi_mode.parse()?,
            nodes: f.nodes.iter().map(|&[x, y]| Point::new(x, y)).collect(),
            commodities: f.commodities.iter().map(|&[s, t]| (s, t)).collect(),
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// Draws `n` i.i.d. uniform points and a uniformly random fixed-point-free
/// pairing. Identical arguments give identical instances.
pub fn generate_instance(n: usize, seed: u64, xi_mode: XiMode) -> Result<NetworkInstance> {
    let d = connectivity_radius(n, xi_mode)?;
    let mut node_rng = rng::stream(seed, Stream::Nodes);
    let nodes = (0..n)
        .map(|_| Point::new(node_rng.gen::<f64>(), node_rng.gen::<f64>()))
        .collect();
    let mut pair_rng = rng::stream(seed, Stream::Pairing);
    let mut perm: Vec<usize> = (0..n).collect();
    // Whole-permutation rejection keeps the derangement uniform.
    loop {
        perm.shuffle(&mut pair_rng);
        if perm.iter().enumerate().all(|(i, &p)| i != p) {
            break;
        }
    }
    Ok(NetworkInstance {
        n,
        d,
        seed,
        xi_mode,
        nodes,
        commodities: perm.into_iter().enumerate().collect(),
    })
}

/// Undirected unit-disk graph with a uniform edge capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDiskGraph {
    pub node_count: usize,
    /// Edges `(u, v)` with `u < v`, sorted lexicographically.
    pub edges: Vec<(usize, usize)>,
    pub capacity: f64,
}

impl UnitDiskGraph {
    /// Neighbor lists, each sorted ascending.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Connected component label per node (labels are smallest member index).
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.node_count).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(u, v) in &self.edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
        (0..self.node_count).map(|x| find(&mut parent, x)).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }
}

/// Builds the closed-disk unit-disk graph of `inst` with capacity `c` on
/// every edge. Uses a bucket grid of side at least `d`, so only neighboring
/// buckets are scanned.
pub fn build_graph(inst: &NetworkInstance, c: f64) -> Result<UnitDiskGraph> {
    if !(c > 0.0) || !c.is_finite() {
        return invalid(format!("capacity must be positive, got {c}"));
    }
    Ok(UnitDiskGraph {
        node_count: inst.nodes.len(),
        edges: disk_edges(&inst.nodes, inst.d),
        capacity: c,
    })
}

pub(crate) fn disk_edges(nodes: &[Point], d: f64) -> Vec<(usize, usize)> {
    let n = nodes.len();
    if n < 2 || !(d >= 0.0) {
        return Vec::new();
    }
    // Bucket side >= d, and never more buckets than about n.
    let max_side = ((n as f64).sqrt().floor() as usize).max(1);
    let side = if d > 0.0 {
        ((1.0 / d).floor() as usize).clamp(1, max_side)
    } else {
        max_side
    };
    let bucket_of = |p: &Point| {
        let bx = ((p.x * side as f64) as usize).min(side - 1);
        let by = ((p.y * side as f64) as usize).min(side - 1);
        (bx, by)
    };
    let mut buckets = vec![Vec::new(); side * side];
    for (i, p) in nodes.iter().enumerate() {
        let (bx, by) = bucket_of(p);
        buckets[by * side + bx].push(i);
    }
    let mut edges = Vec::new();
    for (u, p) in nodes.iter().enumerate() {
        let (bx, by) = bucket_of(p);
        for ny in by.saturating_sub(1)..=(by + 1).min(side - 1) {
            for nx in bx.saturating_sub(1)..=(bx + 1).min(side - 1) {
                for &v in &buckets[ny * side + nx] {
                    if v > u && within_range(p, &nodes[v], d) {
                        edges.push((u, v));
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Area of the part of a radius-`d` disk centered at abscissa `x` that lies
/// at or beyond the cut, `d^2 (theta - sin theta) / 2` with
/// `theta = 2 acos((1/2 - x) / d)`.
pub fn arc_area(x: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return invalid(format!("radius must be positive, got {d}"));
    }
    if !(x >= CUT_X - d && x <= CUT_X) {
        return invalid(format!("x = {x} is outside [1/2 - d, 1/2] for d = {d}"));
    }
    let ratio = ((CUT_X - x) / d).clamp(0.0, 1.0);
    let theta = 2.0 * ratio.acos();
    Ok(0.5 * d * d * (theta - theta.sin()))
}

/// Ensemble mean number of edges straddling the cut, `(2/3) n^2 d^3`.
pub fn expected_cut_edges(n: usize, d: f64) -> f64 {
    let nf = n as f64;
    2.0 / 3.0 * nf * nf * d * d * d
}

/// Edge and strip counts for the center cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CutStats {
    /// Edges with one endpoint at x < 1/2 and the other at x >= 1/2.
    pub straddling_edges: usize,
    /// Nodes in [1/2 - d, 1/2) x [0, 1].
    pub left_strip: usize,
    /// Nodes in [1/2, 1/2 + d] x [0, 1].
    pub right_strip: usize,
}

pub fn count_cut_edges(g: &UnitDiskGraph, inst: &NetworkInstance) -> CutStats {
    let nodes = &inst.nodes;
    let straddling_edges = g
        .edges
        .iter()
        .filter(|&&(u, v)| nodes[u].is_left() != nodes[v].is_left())
        .count();
    let left_strip = nodes.iter().filter(|p| p.x >= CUT_X - inst.d && p.x < CUT_X).count();
    let right_strip = nodes.iter().filter(|p| p.x >= CUT_X && p.x <= CUT_X + inst.d).count();
    CutStats {
        straddling_edges,
        left_strip,
        right_strip,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node(a: Point, b: Point, d: f64) -> NetworkInstance {
        NetworkInstance {
            n: 2,
            d,
            seed: 0,
            xi_mode: XiMode::LogLog,
            nodes: vec![a, b],
            commodities: vec![(0, 1), (1, 0)],
        }
    }

    #[test]
    fn radius_at_one_thousand() {
        // sqrt((ln 1000 + ln ln 1000) / (1000 pi)) evaluated with mpmath at
        // 30 digits: 0.053047023685828109...
        let d = connectivity_radius(1000, XiMode::LogLog).unwrap();
        assert!((d - 0.053_047_023_685_828_1).abs() < 1e-15, "{d}");
    }

    #[test]
    fn radius_reaches_full_square() {
        let xi = 2.0 * PI - 2f64.ln();
        let d = connectivity_radius(2, XiMode::Constant(xi)).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn radius_decreases_with_n() {
        let a = connectivity_radius(1000, XiMode::LogLog).unwrap();
        let b = connectivity_radius(1_000_000, XiMode::LogLog).unwrap();
        assert!(b < a);
    }

    #[test]
    fn radius_rejects_small_n() {
        assert!(connectivity_radius(1, XiMode::Constant(1.0)).is_err());
        // ln ln 2 < 0
        assert!(connectivity_radius(2, XiMode::LogLog).is_err());
        assert!(connectivity_radius(10, XiMode::Constant(-1.0)).is_err());
    }

    #[test]
    fn grid_mode_matches_grid_range() {
        for n in [256usize, 1000, 4096] {
            let m = cells_per_side(n, 2.0).unwrap() as f64;
            let d = connectivity_radius(n, XiMode::Grid(2.0)).unwrap();
            assert!((d - 5f64.sqrt() / m).abs() < 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic_and_deranged() {
        let a = generate_instance(500, 99, XiMode::LogLog).unwrap();
        let b = generate_instance(500, 99, XiMode::LogLog).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        let c = generate_instance(500, 100, XiMode::LogLog).unwrap();
        assert_ne!(a.nodes, c.nodes);
    }

    #[test]
    fn closed_disk_boundary() {
        let d = 0.25;
        let inst = two_node(Point::new(0.25, 0.5), Point::new(0.5, 0.5), d);
        assert_eq!(build_graph(&inst, 1.0).unwrap().edges, vec![(0, 1)]);
        let inst = two_node(Point::new(0.25, 0.5), Point::new(0.5 + 1e-12, 0.5), d);
        assert!(build_graph(&inst, 1.0).unwrap().edges.is_empty());
    }

    #[test]
    fn capacity_must_be_positive() {
        let inst = generate_instance(10, 1, XiMode::LogLog).unwrap();
        assert!(build_graph(&inst, 0.0).is_err());
    }

    #[test]
    fn arc_area_endpoints() {
        let d = 0.1;
        assert!((arc_area(0.5, d).unwrap() - PI * d * d / 2.0).abs() < 1e-15);
        assert!(arc_area(0.5 - d, d).unwrap() < 1e-20);
        assert!(arc_area(0.5 + 1e-9, d).is_err());
        assert!(arc_area(0.5 - d - 1e-9, d).is_err());
    }

    #[test]
    fn arc_area_interior_matches_monte_carlo() {
        // Frozen from a 5 x 10^7-sample Monte Carlo estimate of the area of
        // {(u, v): u >= 1/2, (u - 0.45)^2 + (v - 1/2)^2 <= 0.01}:
        // 0.00614212 with standard error 6.9e-7.
        let a = arc_area(0.45, 0.1).unwrap();
        assert!((a - 0.006_142_12).abs() < 4.0 * 6.9e-7, "{a}");
    }

    #[test]
    fn arc_area_monotone() {
        let d = 0.07;
        let mut prev = 0.0;
        for k in 0..=1000 {
            let x = 0.5 - d + d * k as f64 / 1000.0;
            let a = arc_area(x.min(0.5), d).unwrap();
            assert!(a >= prev);
            assert!(a <= PI * d * d / 2.0 + 1e-18);
            prev = a;
        }
    }

    #[test]
    fn expected_cut_closed_form() {
        assert!((expected_cut_edges(100, 0.1) - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(expected_cut_edges(100, 0.0), 0.0);
    }

    #[test]
    fn cut_counts_small_cases() {
        let inst = two_node(Point::new(0.49, 0.5), Point::new(0.51, 0.5), 0.1);
        let g = build_graph(&inst, 1.0).unwrap();
        let s = count_cut_edges(&g, &inst);
        assert_eq!(s.straddling_edges, 1);
        assert_eq!((s.left_strip, s.right_strip), (1, 1));

        let inst = two_node(Point::new(0.3, 0.5), Point::new(0.35, 0.5), 0.1);
        let g = build_graph(&inst, 1.0).unwrap();
        assert_eq!(count_cut_edges(&g, &inst).straddling_edges, 0);
    }

    #[test]
    fn xi_mode_round_trips_through_text() {
        for mode in [XiMode::LogLog, XiMode::Constant(1.5), XiMode::Grid(2.0)] {
            let parsed: XiMode = mode.to_string().parse().unwrap();
            assert_eq!(parsed, mode);
        }
        assert!("bogus".parse::<XiMode>().is_err());
    }
}
