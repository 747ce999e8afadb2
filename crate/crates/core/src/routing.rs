//! Grid routing: square cells, horizontal-then-vertical cell paths, link
//! loads, and the throughput every commodity can get at once.
//!
//! Traffic of a commodity is spread evenly over the nodes of each cell it
//! visits: the source splits its rate over its own cell, every hop between
//! adjacent cells uses all node pairs of the two cells equally, and the
//! destination cell gathers the rate back into the sink.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::flow::{CommoditySet, FlowNetwork, FlowSolution};
use crate::geometry::{cells_per_side, NetworkInstance};

pub const DEFAULT_C_GRID: f64 = 2.0;

/// Cell coordinates `(i, j)`: row `i` counts up in y, column `j` in x.
pub type Cell = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPartition {
    pub n: usize,
    pub m: usize,
    /// Cell side, `1 / m`.
    pub side: f64,
    /// `c_grid` implied by the rounded `m`: `n / (m^2 ln n)`.
    pub c_grid: f64,
    /// `c_grid ln n / n` for the requested `c_grid`.
    pub target_area: f64,
    /// `sqrt(5) / m`, enough to reach any node of a 4-adjacent cell.
    pub d_grid: f64,
    /// Node indices per cell, row-major, ascending.
    pub cells: Vec<Vec<usize>>,
    pub min_occupancy: usize,
    pub max_occupancy: usize,
}

impl GridPartition {
    pub fn nodes(&self, c: Cell) -> &[usize] {
        &self.cells[c.0 * self.m + c.1]
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Cell {
        let m = self.m;
        let col = ((x * m as f64).floor() as usize).min(m - 1);
        let row = ((y * m as f64).floor() as usize).min(m - 1);
        (row, col)
    }

    pub fn empty_cells(&self) -> Vec<Cell> {
        (0..self.m * self.m)
            .filter(|&k| self.cells[k].is_empty())
            .map(|k| (k / self.m, k % self.m))
            .collect()
    }
}

pub fn build_grid(inst: &NetworkInstance, c_grid: f64) -> Result<GridPartition> {
    let n = inst.nodes.len();
    let m = cells_per_side(n, c_grid)?;
    if m < 2 {
        return invalid(format!(
            "grid would have {m} cells per side for n = {n}, c_grid = {c_grid}; need at least 2"
        ));
    }
    let side = 1.0 / m as f64;
    let ln_n = (n as f64).ln();
    let mut g = GridPartition {
        n,
        m,
        side,
        c_grid: n as f64 / ((m * m) as f64 * ln_n),
        target_area: c_grid * ln_n / n as f64,
        d_grid: 5f64.sqrt() * side,
        cells: vec![Vec::new(); m * m],
        min_occupancy: 0,
        max_occupancy: 0,
    };
    for (i, p) in inst.nodes.iter().enumerate() {
        let (r, c) = g.cell_of(p.x, p.y);
        g.cells[r * m + c].push(i);
    }
    g.min_occupancy = g.cells.iter().map(Vec::len).min().unwrap_or(0);
    g.max_occupancy = g.cells.iter().map(Vec::len).max().unwrap_or(0);
    Ok(g)
}

/// Cell path: move along the row toward the destination column, then along
/// the column toward the destination row.
pub fn route_commodity(src: Cell, dst: Cell) -> Vec<Cell> {
    let mut path = vec![src];
    let (mut i, mut j) = src;
    while j != dst.1 {
        j = if j < dst.1 { j + 1 } else { j - 1 };
        path.push((i, j));
    }
    while i != dst.0 {
        i = if i < dst.0 { i + 1 } else { i - 1 };
        path.push((i, j));
    }
    path
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Right,
    Left,
    Up,
    Down,
}

impl Direction {
    fn between(a: Cell, b: Cell) -> Direction {
        if b.1 > a.1 {
            Direction::Right
        } else if b.1 < a.1 {
            Direction::Left
        } else if b.0 > a.0 {
            Direction::Up
        } else {
            Direction::Down
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Right => "right",
            Direction::Left => "left",
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadProfile {
    pub m: usize,
    /// Commodities crossing each directed cell link, keyed by origin cell
    /// and direction.
    pub links: BTreeMap<(Cell, Direction), u64>,
    /// Largest directed cell-link count.
    pub max_load: u64,
    /// Largest count on a link crossing the column boundary nearest the cut.
    pub center_cut_load: u64,
    /// Largest count on any column boundary, for comparison with the center.
    pub max_horizontal_load: u64,
    pub max_vertical_load: u64,
    /// Most nodes in any single column of cells; bounds the vertical loads
    /// when each node is the sink of at most one commodity.
    pub strip_bound: u64,
    /// Largest per-physical-link share on links between adjacent cells:
    /// both directions of the cell link over the node-pair count.
    pub max_inter_share: f64,
    /// Largest per-physical-link share on links inside one cell (spreading,
    /// gathering, and same-cell commodities).
    pub max_intra_share: f64,
    pub routed: usize,
}

impl LoadProfile {
    pub fn load(&self, from: Cell, dir: Direction) -> u64 {
        self.links.get(&(from, dir)).copied().unwrap_or(0)
    }

    pub fn center_dominates(&self) -> bool {
        self.center_cut_load >= self.max_horizontal_load
    }

    /// Per-physical-link share of the busiest physical link.
    pub fn bottleneck_share(&self) -> f64 {
        self.max_inter_share.max(self.max_intra_share)
    }

    /// Writes `cell_i,cell_j,direction,load,physical_links` rows.
    pub fn write_csv<W: Write>(&self, grid: &GridPartition, mut w: W) -> Result<()> {
        writeln!(w, "cell_i,cell_j,direction,load,physical_links")?;
        for (&((i, j), dir), &load) in &self.links {
            let to = neighbor((i, j), dir);
            let links = grid.nodes((i, j)).len() * grid.nodes(to).len();
            writeln!(w, "{i},{j},{},{load},{links}", dir.as_str())?;
        }
        Ok(())
    }
}

fn neighbor(c: Cell, dir: Direction) -> Cell {
    match dir {
        Direction::Right => (c.0, c.1 + 1),
        Direction::Left => (c.0, c.1 - 1),
        Direction::Up => (c.0 + 1, c.1),
        Direction::Down => (c.0 - 1, c.1),
    }
}

fn cell_of_node(grid: &GridPartition, inst: &NetworkInstance, v: usize) -> Cell {
    let p = inst.nodes[v];
    grid.cell_of(p.x, p.y)
}

/// Routes every commodity and accumulates cell-link counts. Fails on the
/// first empty cell met along a route.
pub fn compute_loads(grid: &GridPartition, inst: &NetworkInstance, comm: &CommoditySet) -> Result<LoadProfile> {
    comm.check(inst.nodes.len())?;
    let m = grid.m;
    let mut links: BTreeMap<(Cell, Direction), u64> = BTreeMap::new();
    // Per-node spreading and gathering weights. A commodity inside one cell
    // is spread over the cell and gathered again like any other.
    let mut out_weight = vec![0.0; inst.nodes.len()];
    let mut in_weight = vec![0.0; inst.nodes.len()];
    for &(s, t) in &comm.pairs {
        let (a, b) = (cell_of_node(grid, inst, s), cell_of_node(grid, inst, t));
        let path = route_commodity(a, b);
        if let Some(&c) = path.iter().find(|&&c| grid.nodes(c).is_empty()) {
            return Err(Error::EmptyCell { i: c.0, j: c.1 });
        }
        out_weight[s] += 1.0 / grid.nodes(a).len() as f64;
        in_weight[t] += 1.0 / grid.nodes(b).len() as f64;
        for w in path.windows(2) {
            *links.entry((w[0], Direction::between(w[0], w[1]))).or_insert(0) += 1;
        }
    }

    let max_load = links.values().copied().max().unwrap_or(0);
    let center_boundaries: Vec<usize> = if m.is_multiple_of(2) {
        vec![m / 2]
    } else {
        vec![m / 2, m / 2 + 1]
    };
    let mut boundary_load = vec![0u64; m + 1];
    let mut max_vertical_load = 0;
    let mut max_inter_share: f64 = 0.0;
    for (&((i, j), dir), &load) in &links {
        let to = neighbor((i, j), dir);
        match dir {
            Direction::Right => boundary_load[j + 1] = boundary_load[j + 1].max(load),
            Direction::Left => boundary_load[j] = boundary_load[j].max(load),
            _ => max_vertical_load = max_vertical_load.max(load),
        }
        let back = links.get(&(to, Direction::between(to, (i, j)))).copied().unwrap_or(0);
        let pairs = (grid.nodes((i, j)).len() * grid.nodes(to).len()) as f64;
        max_inter_share = max_inter_share.max((load + back) as f64 / pairs);
    }
    let center_cut_load = center_boundaries.iter().map(|&b| boundary_load[b]).max().unwrap_or(0);
    let max_horizontal_load = boundary_load.iter().copied().max().unwrap_or(0);
    let strip_bound = (0..m)
        .map(|j| (0..m).map(|i| grid.nodes((i, j)).len() as u64).sum::<u64>())
        .max()
        .unwrap_or(0);

    let mut max_intra_share: f64 = 0.0;
    for cell in &grid.cells {
        for (x, &u) in cell.iter().enumerate() {
            for &v in &cell[x + 1..] {
                let share = out_weight[u] + out_weight[v] + in_weight[u] + in_weight[v];
                max_intra_share = max_intra_share.max(share);
            }
        }
    }

    Ok(LoadProfile {
        m,
        links,
        max_load,
        center_cut_load,
        max_horizontal_load,
        max_vertical_load,
        strip_bound,
        max_inter_share,
        max_intra_share,
        routed: comm.len(),
    })
}

/// Rate per commodity when the busiest physical link carries `share`
/// commodities' worth of traffic: `c / share`.
pub fn throughput_for_share(share: f64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return invalid(format!("capacity must be positive, got {c}"));
    }
    if !(share > 0.0) {
        return Err(Error::NoTraffic);
    }
    Ok(c / share)
}

/// Largest common rate the routing supports on links of capacity `c`.
pub fn achievable_throughput(loads: &LoadProfile, c: f64) -> Result<f64> {
    throughput_for_share(loads.bottleneck_share(), c)
}

/// The routed traffic at rate `gamma` as link flows of `net`, which must
/// contain every node pair inside a cell and between 4-adjacent cells.
pub fn routed_flow(
    grid: &GridPartition,
    inst: &NetworkInstance,
    comm: &CommoditySet,
    net: &FlowNetwork,
    gamma: f64,
) -> Result<FlowSolution> {
    comm.check(inst.nodes.len())?;
    let mut index: std::collections::HashMap<(usize, usize), usize> = std::collections::HashMap::new();
    for (k, l) in net.links().iter().enumerate() {
        index.entry((l.tail, l.head)).or_insert(k);
    }
    let links = net.links();
    let lookup = |u: usize, v: usize| -> Result<(usize, f64)> {
        if let Some(&k) = index.get(&(u, v)) {
            return Ok((k, 1.0));
        }
        if let Some(&k) = index.get(&(v, u)) {
            if links[k].bidirectional {
                return Ok((k, -1.0));
            }
        }
        Err(Error::InvalidNetwork(format!("nodes {u} and {v} are not linked")))
    };
    let mut flows = Vec::with_capacity(comm.len());
    for &(s, t) in &comm.pairs {
        let (a, b) = (cell_of_node(grid, inst, s), cell_of_node(grid, inst, t));
        let path = route_commodity(a, b);
        if let Some(&c) = path.iter().find(|&&c| grid.nodes(c).is_empty()) {
            return Err(Error::EmptyCell { i: c.0, j: c.1 });
        }
        let mut f: BTreeMap<usize, f64> = BTreeMap::new();
        let mut push = |u: usize, v: usize, amount: f64| -> Result<()> {
            let (k, sign) = lookup(u, v)?;
            *f.entry(k).or_insert(0.0) += sign * amount;
            Ok(())
        };
        let na = grid.nodes(a).len() as f64;
        for &u in grid.nodes(a) {
            if u != s {
                push(s, u, gamma / na)?;
            }
        }
        for w in path.windows(2) {
            let (from, to) = (grid.nodes(w[0]), grid.nodes(w[1]));
            let amount = gamma / (from.len() * to.len()) as f64;
            for &u in from {
                for &v in to {
                    push(u, v, amount)?;
                }
            }
        }
        let nb = grid.nodes(b).len() as f64;
        for &v in grid.nodes(b) {
            if v != t {
                push(v, t, gamma / nb)?;
            }
        }
        flows.push(f.into_iter().filter(|&(_, x)| x != 0.0).collect());
    }
    Ok(FlowSolution::from_flows(net, comm.pairs.clone(), flows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::verify_solution;
    use crate::geometry::{build_graph, generate_instance, Point, XiMode};

    #[test]
    fn literal_route_examples() {
        assert_eq!(
            route_commodity((2, 1), (3, 4)),
            vec![(2, 1), (2, 2), (2, 3), (2, 4), (3, 4)]
        );
        assert_eq!(route_commodity((4, 4), (4, 4)), vec![(4, 4)]);
        assert_eq!(route_commodity((5, 5), (2, 5)), vec![(5, 5), (4, 5), (3, 5), (2, 5)]);
        assert_eq!(route_commodity((0, 3), (1, 1)), vec![(0, 3), (0, 2), (0, 1), (1, 1)]);
    }

    #[test]
    fn routes_are_shortest_and_simple() {
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    for d in 0..5 {
                        let p = route_commodity((a, b), (c, d));
                        assert_eq!(p.len() - 1, a.abs_diff(c) + b.abs_diff(d));
                        let mut q = p.clone();
                        q.sort();
                        q.dedup();
                        assert_eq!(q.len(), p.len());
                        for w in p.windows(2) {
                            assert_eq!(w[0].0.abs_diff(w[1].0) + w[0].1.abs_diff(w[1].1), 1);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn grid_size_and_partition() {
        let inst = generate_instance(10_000, 1, XiMode::LogLog).unwrap();
        let g = build_grid(&inst, 2.0).unwrap();
        assert_eq!(g.m, 23);
        assert_eq!(g.cells.iter().map(Vec::len).sum::<usize>(), 10_000);
        assert!((g.d_grid - 5f64.sqrt() / 23.0).abs() < 1e-15);
        assert!((g.side * g.m as f64 - 1.0).abs() < 1e-15);
        assert!(build_grid(&inst, 5000.0).is_err());
    }

    #[test]
    fn boundary_nodes_land_in_last_cell() {
        let inst = NetworkInstance {
            n: 4,
            d: 1.0,
            seed: 0,
            xi_mode: XiMode::LogLog,
            nodes: vec![
                Point::new(1.0, 1.0),
                Point::new(0.0, 0.0),
                Point::new(0.5, 0.5),
                Point::new(0.2, 0.9),
            ],
            commodities: Vec::new(),
        };
        let g = GridPartition {
            n: 4,
            m: 2,
            side: 0.5,
            c_grid: 1.0,
            target_area: 0.25,
            d_grid: 5f64.sqrt() / 2.0,
            cells: vec![],
            min_occupancy: 0,
            max_occupancy: 0,
        };
        assert_eq!(g.cell_of(inst.nodes[0].x, inst.nodes[0].y), (1, 1));
        assert_eq!(g.cell_of(inst.nodes[1].x, inst.nodes[1].y), (0, 0));
        assert_eq!(g.cell_of(inst.nodes[2].x, inst.nodes[2].y), (1, 1));
        assert_eq!(g.cell_of(inst.nodes[3].x, inst.nodes[3].y), (1, 0));
    }

    #[test]
    fn single_commodity_loads() {
        let inst = generate_instance(2000, 2, XiMode::Grid(2.0)).unwrap();
        let g = build_grid(&inst, 2.0).unwrap();
        let (s, t) = inst.left_to_right()[0];
        let loads = compute_loads(&g, &inst, &CommoditySet::new(vec![(s, t)])).unwrap();
        let (a, b) = (
            g.cell_of(inst.nodes[s].x, inst.nodes[s].y),
            g.cell_of(inst.nodes[t].x, inst.nodes[t].y),
        );
        let hops = route_commodity(a, b).len() - 1;
        assert_eq!(loads.links.len(), hops);
        assert!(loads.links.values().all(|&l| l == 1));
    }

    #[test]
    fn throughput_arithmetic() {
        assert!((throughput_for_share(10.0, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(throughput_for_share(0.0, 1.0), Err(Error::NoTraffic)));
    }

    #[test]
    fn empty_cell_is_reported() {
        // All nodes in the bottom-left cell except the sink in the top-right.
        let mut nodes: Vec<Point> = (0..20).map(|k| Point::new(0.01 + 0.001 * k as f64, 0.02)).collect();
        nodes.push(Point::new(0.99, 0.99));
        let inst = NetworkInstance {
            n: 21,
            d: 1.0,
            seed: 0,
            xi_mode: XiMode::LogLog,
            nodes,
            commodities: Vec::new(),
        };
        let g = build_grid(&inst, 1.0).unwrap();
        let r = compute_loads(&g, &inst, &CommoditySet::new(vec![(0, 20)]));
        assert!(matches!(r, Err(Error::EmptyCell { i: 0, j: 1 })));
    }

    #[test]
    fn routed_flow_is_feasible_and_center_dominates() {
        for seed in 0..3 {
            let inst = generate_instance(1000, seed, XiMode::Grid(2.0)).unwrap();
            let g = build_grid(&inst, 2.0).unwrap();
            assert!(inst.d >= g.d_grid * (1.0 - 1e-12));
            let comm = CommoditySet::from_instance(&inst, true);
            let loads = compute_loads(&g, &inst, &comm).unwrap();
            assert!(loads.max_vertical_load <= loads.strip_bound);
            let gamma = achievable_throughput(&loads, 1.0).unwrap();
            let net = FlowNetwork::from_graph(&build_graph(&inst, 1.0).unwrap());
            let sol = routed_flow(&g, &inst, &comm, &net, gamma).unwrap();
            assert!(verify_solution(&sol, &net).unwrap(), "seed {seed}");
            let peak = sol
                .utilization
                .iter()
                .zip(net.links())
                .map(|(u, l)| u / l.capacity)
                .fold(0.0f64, f64::max);
            // The bottleneck is tight.
            assert!((peak - 1.0).abs() < 1e-9, "peak {peak}");
        }
    }
}
