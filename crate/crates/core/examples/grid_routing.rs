//! Grid partition, L-shaped routing of the left-to-right commodities and the
//! resulting per-commodity throughput.

use netcap::flow::CommoditySet;
use netcap::geometry::{generate_instance, XiMode};
use netcap::routing::{achievable_throughput, build_grid, compute_loads, route_commodity, DEFAULT_C_GRID};

fn main() -> netcap::Result<()> {
    println!("route (2,1) -> (3,4): {:?}", route_commodity((2, 1), (3, 4)));
    for n in [1_000, 4_000, 16_000] {
        let inst = generate_instance(n, 1, XiMode::Grid(DEFAULT_C_GRID))?;
        let grid = build_grid(&inst, DEFAULT_C_GRID)?;
        let loads = compute_loads(&grid, &inst, &CommoditySet::from_instance(&inst, true))?;
        let gamma = achievable_throughput(&loads, 1.0)?;
        let nf = n as f64;
        println!(
            "n = {n:>6}: m = {:>2}, cells hold {}..{} nodes, center load {}, gamma {gamma:.4}, normalized {:.3}",
            grid.m,
            grid.min_occupancy,
            grid.max_occupancy,
            loads.center_cut_load,
            gamma * nf.sqrt() / nf.ln().powf(1.5)
        );
    }
    Ok(())
}
