//! A small sweep written as CSV, with the log-log fit of the normalized means.

use netcap::harness::{run_experiment, ExperimentConfig, Metric};

fn main() -> netcap::Result<()> {
    let metric: Metric = std::env::args().nth(1).as_deref().unwrap_or("single-beam").parse()?;
    let cfg = ExperimentConfig {
        trials: 5,
        ..ExperimentConfig::new(metric, vec![500, 1000, 2000, 4000])
    };
    let result = run_experiment(&cfg)?;
    print!("{}", result.to_csv());
    for s in &result.summaries {
        eprintln!(
            "n = {:>5}: mean normalized {:.4} over {} trials",
            s.n, s.mean_normalized, s.successes
        );
    }
    if let Some(fit) = result.fit_normalized {
        eprintln!("normalized slope {:+.4} (r² {:.3})", fit.slope, fit.r_squared);
    }
    Ok(())
}
