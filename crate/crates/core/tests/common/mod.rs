//! Oracles and instance builders shared by the integration tests.
#![allow(dead_code)]

use netcap::flow::{concurrent_flow_approx, concurrent_flow_exact, max_flow, CommoditySet, FlowNetwork};
use netcap::geometry::{build_graph, generate_instance, NetworkInstance, XiMode};
use netcap::Error;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

pub const EPS: f64 = 0.05;
/// Upper side of the small-instance check: the approximation may not exceed
/// the exact optimum by more than this relative amount.
pub const EXACT_REL_TOL: f64 = 1e-6;

/// A small unit-disk instance with a radius drawn so graphs range from
/// sparse to dense, and its first `k` commodities.
pub struct SmallCase {
    pub inst: NetworkInstance,
    pub net: FlowNetwork,
    pub comm: CommoditySet,
}

pub fn small_case(rng: &mut Xoshiro256StarStar) -> SmallCase {
    let n = rng.gen_range(4..=10);
    let radius: f64 = rng.gen_range(0.35..0.75);
    let nf = n as f64;
    let xi = (std::f64::consts::PI * radius * radius * nf - nf.ln()).max(0.0);
    let inst = generate_instance(n, rng.gen(), XiMode::Constant(xi)).unwrap();
    let net = FlowNetwork::from_graph(&build_graph(&inst, 1.0).unwrap());
    let k = rng.gen_range(2..=4);
    let comm = CommoditySet::new(inst.commodities[..k].to_vec());
    SmallCase { inst, net, comm }
}

pub struct SmallOutcome {
    pub checked: usize,
    pub skipped: usize,
    pub failures: Vec<String>,
}

/// Compares the approximate concurrent flow with the exact path LP on
/// `count` instances. Instances with more simple paths than the exact
/// oracle accepts are redrawn.
pub fn approx_vs_exact(count: usize, seed: u64) -> SmallOutcome {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut out = SmallOutcome {
        checked: 0,
        skipped: 0,
        failures: Vec::new(),
    };
    while out.checked < count {
        let case = small_case(&mut rng);
        let exact = match concurrent_flow_exact(&case.net, &case.comm) {
            Ok(r) => r,
            Err(Error::PathBudgetExceeded { .. }) => {
                out.skipped += 1;
                continue;
            }
            Err(e) => panic!("exact oracle failed: {e}"),
        };
        let approx = concurrent_flow_approx(&case.net, &case.comm, EPS).unwrap();
        let lo = (1.0 - EPS) * exact.lambda;
        let hi = exact.lambda * (1.0 + EXACT_REL_TOL);
        if !(approx.lambda >= lo && approx.lambda <= hi) {
            out.failures.push(format!(
                "n={} seed={} pairs={:?}: approx {} exact {} (upper {}, phases {})",
                case.inst.n,
                case.inst.seed,
                case.comm.pairs,
                approx.lambda,
                exact.lambda,
                approx.upper_bound,
                approx.iterations
            ));
        }
        out.checked += 1;
    }
    out
}

/// Random network on 2..=10 nodes with integer capacities in 1..=5, directed
/// or undirected with equal odds.
pub fn random_network(rng: &mut Xoshiro256StarStar) -> FlowNetwork {
    let n = rng.gen_range(2..=10);
    let density: f64 = rng.gen_range(0.1..0.8);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(density) {
                edges.push((u, v, rng.gen_range(1..=5) as f64));
            }
        }
    }
    if rng.gen_bool(0.5) {
        FlowNetwork::directed(n, &edges).unwrap()
    } else {
        let und: Vec<_> = edges.into_iter().filter(|&(u, v, _)| u < v).collect();
        FlowNetwork::undirected(n, &und).unwrap()
    }
}

/// Minimum cut between `s` and `t` by enumerating every vertex subset that
/// holds `s` but not `t`.
pub fn brute_min_cut(net: &FlowNetwork, s: usize, t: usize) -> f64 {
    let n = net.node_count();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask & (1 << s) == 0 || mask & (1 << t) != 0 {
            continue;
        }
        let cut: f64 = (0..net.arc_count())
            .filter(|&a| {
                let (u, v, _) = net.arc(a);
                mask & (1 << u) != 0 && mask & (1 << v) == 0
            })
            .map(|a| net.arc_capacity(a))
            .sum();
        best = best.min(cut);
    }
    best
}

pub fn max_flow_value(net: &FlowNetwork, s: usize, t: usize) -> f64 {
    max_flow(net, &[s], &[t]).unwrap().value
}
