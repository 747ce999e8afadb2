//! Routing throughput, concurrent flow and cut capacity on the same instances:
//! gamma <= lambda / (1 - eps) <= nu.

use netcap::geometry::XiMode;
use netcap::harness::{connected_instance, sandwich_check};

fn main() -> netcap::Result<()> {
    let eps = 0.05;
    for n in [256, 512, 1024] {
        for seed in 0..2 {
            let inst = connected_instance(n, seed, XiMode::Grid(2.0)).map_err(|(_, e)| e)?;
            let r = sandwich_check(&inst, eps)?;
            println!(
                "n = {n:>4} seed {}: gamma {:.3} <= lambda/(1-eps) {:.3} <= nu {:.3}  [{}]",
                inst.seed,
                r.gamma,
                r.lambda_hat / (1.0 - eps),
                r.nu_bar,
                if r.holds() { "holds" } else { "violated" }
            );
        }
    }
    Ok(())
}
