//! Generate an instance at the connectivity radius, check connectivity and
//! round-trip it through the network file format.

use netcap::geometry::{build_graph, connectivity_radius, generate_instance, XiMode};
use netcap::harness::{network_from_json, network_to_json};

fn main() -> netcap::Result<()> {
    let n = 1000;
    let inst = generate_instance(n, 42, XiMode::LogLog)?;
    let g = build_graph(&inst, 1.0)?;
    println!(
        "n = {n}, d = {:.5} (formula {:.5})",
        inst.d,
        connectivity_radius(n, XiMode::LogLog)?
    );
    println!("edges = {}, connected = {}", g.edges.len(), g.is_connected());
    println!("components = {}", g.components().iter().max().map_or(0, |c| c + 1));

    let text = network_to_json(&inst)?;
    assert_eq!(network_from_json(&text)?, inst);
    println!("network file: {} bytes, round-trips exactly", text.len());
    Ok(())
}
