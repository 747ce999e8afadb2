//! Edges straddling the x = 1/2 cut against (2/3) n^2 d^3.

use netcap::geometry::{build_graph, count_cut_edges, generate_instance, XiMode};

fn main() -> netcap::Result<()> {
    println!("{:>7} {:>10} {:>10} {:>7}", "n", "mean", "(2/3)n²d³", "ratio");
    for n in [1_000, 4_000, 16_000] {
        let seeds = 20;
        let mut total = 0.0;
        let mut d = 0.0;
        for seed in 0..seeds {
            let inst = generate_instance(n, seed, XiMode::LogLog)?;
            total += count_cut_edges(&build_graph(&inst, 1.0)?, &inst).straddling_edges as f64;
            d = inst.d;
        }
        let mean = total / seeds as f64;
        let law = 2.0 / 3.0 * (n as f64).powi(2) * d.powi(3);
        println!("{n:>7} {mean:>10.1} {law:>10.1} {:>7.3}", mean / law);
    }
    Ok(())
}
