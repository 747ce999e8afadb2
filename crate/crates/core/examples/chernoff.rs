//! Chernoff exponents, the uniform-coverage threshold and a comparison of the
//! bound with exact and simulated binomial tails.

use netcap::rng::{stream, Stream};
use netcap::stats::{binomial_deviation_tail, chernoff_theta, simulate_deviation_fraction, uniform_delta_threshold};

fn main() -> netcap::Result<()> {
    let delta_star = uniform_delta_threshold();
    println!("pi theta(delta) = 1/2 at delta = {delta_star:.6}");
    let c = chernoff_theta(0.5)?;
    println!(
        "delta 0.5: theta1 {:.6}, theta2 {:.6}, theta {:.6}",
        c.theta1, c.theta2, c.theta
    );

    println!(
        "{:>5} {:>5} {:>10} {:>10} {:>10}",
        "mean", "delta", "exact", "simulated", "bound"
    );
    let mut rng = stream(1, Stream::Aux(0));
    for mean in [20.0, 100.0] {
        for delta in [0.2, 0.3] {
            let trials = 10_000;
            let p = mean / trials as f64;
            println!(
                "{mean:>5} {delta:>5} {:>10.2e} {:>10.2e} {:>10.2e}",
                binomial_deviation_tail(trials, p, delta)?,
                simulate_deviation_fraction(trials, p, delta, 20_000, &mut rng)?,
                chernoff_theta(delta)?.bound(mean)
            );
        }
    }
    Ok(())
}
