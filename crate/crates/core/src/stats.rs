//! Chernoff bounds for binomial node counts, the uniform-concentration
//! threshold for cut disks, and log-log regression.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{invalid, Result};

/// Exponents of the two-sided Chernoff bound at relative deviation `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffParams {
    pub delta: f64,
    /// `(1 + delta) ln(1 + delta) - delta`
    pub theta1: f64,
    /// `delta^2 / 2`
    pub theta2: f64,
    pub theta: f64,
}

impl ChernoffParams {
    /// `exp(-theta * mean)`: bound on `P(|N - mean| > delta * mean)` for a
    /// binomial count `N` with the given mean.
    pub fn bound(&self, mean: f64) -> f64 {
        (-self.theta * mean).exp()
    }
}

pub fn chernoff_theta(delta: f64) -> Result<ChernoffParams> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(theta_unchecked(delta))
}

fn theta_unchecked(delta: f64) -> ChernoffParams {
    let theta1 = (1.0 + delta) * delta.ln_1p() - delta;
    let theta2 = delta * delta / 2.0;
    ChernoffParams {
        delta,
        theta1,
        theta2,
        theta: theta1.min(theta2),
    }
}

/// Smallest `delta` with `pi * theta(delta) >= 1/2`, found by bisection on
/// `[0.01, 0.99]` to a bracket width of `1e-6`.
pub fn uniform_delta_threshold() -> f64 {
    let f = |d: f64| PI * theta_unchecked(d).theta - 0.5;
    let (mut lo, mut hi) = (0.01, 0.99);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact `P(|N - tp| > delta * tp)` for `N ~ Binomial(trials, p)`.
pub fn binomial_deviation_tail(trials: u64, p: f64, delta: f64) -> Result<f64> {
    let dist = Binomial::new(p, trials).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    let mean = trials as f64 * p;
    let hi = mean * (1.0 + delta);
    let lo = mean * (1.0 - delta);
    // P(N > hi) + P(N < lo)
    let upper = 1.0 - dist.cdf(hi.floor() as u64);
    let lower = if lo <= 0.0 {
        0.0
    } else {
        let below = lo.ceil() as u64;
        if below == 0 {
            0.0
        } else {
            dist.cdf(below - 1)
        }
    };
    Ok(upper.max(0.0) + lower)
}

/// Fraction of `samples` draws of `Binomial(trials, p)` deviating from the
/// mean by more than `delta` times the mean.
pub fn simulate_deviation_fraction<R: Rng>(
    trials: u64,
    p: f64,
    delta: f64,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if samples == 0 {
        return invalid("samples must be positive");
    }
    let dist = Binomial::new(p, trials).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    let mean = trials as f64 * p;
    let hits = (0..samples)
        .filter(|_| {
            let x: f64 = rng.sample(dist);
            (x - mean).abs() > delta * mean
        })
        .count();
    Ok(hits as f64 / samples as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least squares of `ln y` on `ln x`. A constant response fits perfectly.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return invalid(format!("length mismatch: {} xs, {} ys", xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return invalid("need at least two points");
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !(**v > 0.0 && v.is_finite())) {
        return invalid(format!("log-log fit needs positive finite values, got {v}"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("all x values are equal");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy <= f64::EPSILON * ly.iter().map(|y| y * y).sum::<f64>() {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        samples: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    #[test]
    fn theta_at_half() {
        let c = chernoff_theta(0.5).unwrap();
        // mpmath, 30 digits
        assert!((c.theta1 - 0.108_197_662_162_246_58).abs() < 1e-15);
        assert_eq!(c.theta2, 0.125);
        assert_eq!(c.theta, c.theta1);
    }

    #[test]
    fn theta_vanishes_near_zero() {
        let c = chernoff_theta(1e-6).unwrap();
        assert!(c.theta > 0.0 && c.theta < 1e-12);
    }

    #[test]
    fn theta_rejects_out_of_range() {
        for d in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(chernoff_theta(d).is_err());
        }
    }

    #[test]
    fn theta1_is_the_minimum_above_point_four() {
        for i in 1..1000 {
            let d = 0.4 + 0.6 * i as f64 / 1000.0;
            let c = chernoff_theta(d).unwrap();
            assert!(c.theta1 < c.theta2, "delta {d}");
        }
    }

    #[test]
    fn threshold_solves_the_defining_equation() {
        let d = uniform_delta_threshold();
        // mpmath root: 0.615060473223981
        assert!((d - 0.615060473223981).abs() < 1e-6);
        assert!((PI * chernoff_theta(d).unwrap().theta - 0.5).abs() < 1e-6);
        assert!(PI * chernoff_theta(0.55).unwrap().theta < 0.5);
        assert!(PI * chernoff_theta(0.65).unwrap().theta > 0.5);
    }

    #[test]
    fn exact_tail_matches_small_enumeration() {
        // Binomial(4, 1/2), mean 2, delta 0.5: |N - 2| > 1 means N in {0, 4}.
        let t = binomial_deviation_tail(4, 0.5, 0.5).unwrap();
        assert!((t - 2.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn bound_dominates_exact_tail() {
        for &(n, p) in &[(100u64, 0.1), (1000, 0.01), (1000, 0.1), (10_000, 0.01), (50, 0.9)] {
            for &delta in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                let c = chernoff_theta(delta).unwrap();
                let mean = n as f64 * p;
                let exact = binomial_deviation_tail(n, p, delta).unwrap();
                assert!(exact <= c.bound(mean), "n {n} p {p} delta {delta}");
            }
        }
    }

    #[test]
    fn bound_dominates_simulated_tail() {
        let c = chernoff_theta(0.5).unwrap();
        let mut rng = stream(11, Stream::Aux(0));
        let frac = simulate_deviation_fraction(1000, 0.1, 0.5, 10_000, &mut rng).unwrap();
        assert!(frac <= c.bound(100.0));
    }

    #[test]
    fn fit_examples() {
        let xs: Vec<f64> = (1..=10).map(f64::from).collect();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let f = loglog_fit(&xs, &sq).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let cube: Vec<f64> = xs.iter().map(|x| 2.0 / 3.0 * x.powi(3)).collect();
        let f = loglog_fit(&xs, &cube).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-9);
        assert!((f.intercept - (2.0f64 / 3.0).ln()).abs() < 1e-9);
        let flat = vec![7.0; 10];
        let f = loglog_fit(&xs, &flat).unwrap();
        assert!(f.slope.abs() < 1e-15);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn fit_errors() {
        assert!(loglog_fit(&[1.0], &[1.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0], &[1.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0], &[0.0, 1.0]).is_err());
        assert!(loglog_fit(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }
}
