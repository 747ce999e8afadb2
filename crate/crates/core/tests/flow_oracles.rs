mod common;

use common::{brute_min_cut, random_network, small_case, EPS};
use netcap::flow::*;
use netcap::geometry::{build_graph, generate_instance, XiMode};
use netcap::harness::{sweep_solver_options, SWEEP_SCANS_PER_ARC};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[test]
fn max_flow_equals_min_cut_enumeration() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(11);
    for case in 0..500 {
        let net = random_network(&mut rng);
        let n = net.node_count();
        let s = rng.gen_range(0..n);
        let t = (s + rng.gen_range(1..n)) % n;
        let r = max_flow(&net, &[s], &[t]).unwrap();
        let brute = brute_min_cut(&net, s, t);
        assert_eq!(r.value, brute, "case {case}: s={s} t={t} links={:?}", net.links());
        assert_eq!(r.cut_capacity, r.value, "case {case}");
    }
}

#[test]
fn approximation_brackets_exact_optimum() {
    let out = common::approx_vs_exact(40, 5);
    assert!(out.failures.is_empty(), "{:#?}", out.failures);
}

/// Largest grid value of lambda the phase-one test accepts, refined by
/// bisection between that grid point and the next.
fn lambda_by_feasibility(net: &FlowNetwork, comm: &CommoditySet) -> f64 {
    let upper = comm
        .pairs
        .iter()
        .map(|&(s, t)| max_flow(net, &[s], &[t]).unwrap().value)
        .fold(f64::INFINITY, f64::min);
    let steps = 100;
    let h = upper / steps as f64;
    let mut lo = 0.0;
    for i in 1..=steps {
        if concurrent_flow_feasible(net, comm, i as f64 * h).unwrap() {
            lo = i as f64 * h;
        } else {
            break;
        }
    }
    let mut hi = (lo + h).min(upper);
    if concurrent_flow_feasible(net, comm, hi).unwrap() {
        return hi;
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if concurrent_flow_feasible(net, comm, mid).unwrap() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn exact_optimum_matches_feasibility_search_on_six_nodes() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(21);
    let mut checked = 0;
    while checked < 10 {
        let case = small_case(&mut rng);
        if case.inst.n != 6 {
            continue;
        }
        let exact = concurrent_flow_exact(&case.net, &case.comm).unwrap();
        let searched = lambda_by_feasibility(&case.net, &case.comm);
        assert!(
            (searched - exact.lambda).abs() <= 1e-6 * exact.lambda.max(1.0),
            "seed {}: search {searched} exact {}",
            case.inst.seed,
            exact.lambda
        );
        assert!(verify_solution(&exact.solution, &case.net).unwrap());
        checked += 1;
    }
}

#[test]
fn single_commodity_reduces_to_max_flow() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(31);
    for _ in 0..50 {
        let case = small_case(&mut rng);
        let (s, t) = case.comm.pairs[0];
        let comm = CommoditySet::new(vec![(s, t)]);
        let flow = max_flow(&case.net, &[s], &[t]).unwrap().value;
        let r = concurrent_flow_approx(&case.net, &comm, EPS).unwrap();
        assert!(
            r.lambda >= (1.0 - EPS) * flow && r.lambda <= flow * (1.0 + 1e-9),
            "{} vs {flow}",
            r.lambda
        );
    }
}

#[test]
fn two_commodities_on_one_bottleneck_get_half() {
    // 0 and 1 both reach 2 -> 3 only through the single unit link (2, 3).
    let net = FlowNetwork::undirected(5, &[(0, 2, 5.0), (1, 2, 5.0), (2, 3, 1.0), (3, 4, 5.0)]).unwrap();
    let comm = CommoditySet::new(vec![(0, 3), (1, 4)]);
    let exact = concurrent_flow_exact(&net, &comm).unwrap();
    assert_eq!(exact.lambda, 0.5);
    let r = concurrent_flow_approx(&net, &comm, EPS).unwrap();
    assert!(r.lambda >= (1.0 - EPS) * 0.5 && r.lambda <= 0.5 + 1e-12, "{}", r.lambda);
    assert!(verify_solution(&r.solution, &net).unwrap());
}

#[test]
fn disconnected_commodity_is_reported() {
    let net = FlowNetwork::undirected(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
    let comm = CommoditySet::new(vec![(0, 1), (1, 2)]);
    let r = concurrent_flow_approx(&net, &comm, EPS).unwrap();
    assert_eq!(r.lambda, 0.0);
    assert_eq!(r.disconnected, vec![1]);
    assert!(verify_solution(&r.solution, &net).unwrap());
}

#[test]
fn over_capacity_solution_fails_verification() {
    let net = FlowNetwork::undirected(2, &[(0, 1, 1.0)]).unwrap();
    let sol = FlowSolution::from_flows(&net, vec![(0, 1)], vec![vec![(0, 1.0 + 1e-3)]]);
    assert!(!verify_solution(&sol, &net).unwrap());
    let sol = FlowSolution::from_flows(&net, vec![(0, 1)], vec![vec![(0, 1.0)]]);
    assert!(verify_solution(&sol, &net).unwrap());
}

// Both commodity sets route within a constant factor of each other.
#[test]
fn restriction_to_left_right_changes_rate_by_a_constant() {
    for n in [256, 512, 1024] {
        let inst = generate_instance(n, 1, XiMode::Grid(2.0)).unwrap();
        let net = FlowNetwork::from_graph(&build_graph(&inst, 1.0).unwrap());
        let opts = sweep_solver_options(SWEEP_SCANS_PER_ARC);
        let full = concurrent_flow_approx_with(&net, &CommoditySet::from_instance(&inst, false), EPS, &opts).unwrap();
        let lr = concurrent_flow_approx_with(&net, &CommoditySet::from_instance(&inst, true), EPS, &opts).unwrap();
        assert!(full.disconnected.is_empty() && lr.disconnected.is_empty(), "n={n}");
        let ratio = full.lambda / lr.lambda;
        assert!(
            (1.0 / 8.0..=8.0).contains(&ratio),
            "n={n}: {} / {} = {ratio}",
            full.lambda,
            lr.lambda
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn approximate_solutions_are_feasible(seed in any::<u64>(), n in 8usize..80) {
        let inst = generate_instance(n, seed, XiMode::LogLog).unwrap();
        let net = FlowNetwork::from_graph(&build_graph(&inst, 1.0).unwrap());
        let comm = CommoditySet::from_instance(&inst, false);
        let r = concurrent_flow_approx(&net, &comm, EPS).unwrap();
        prop_assert!(verify_solution(&r.solution, &net).unwrap());
        prop_assert!(r.lambda >= 0.0 && r.lambda <= r.upper_bound * (1.0 + 1e-9));
        if r.disconnected.is_empty() {
            prop_assert!(r.solution.lambdas.iter().all(|&l| (l - r.lambda).abs() <= 1e-9));
        } else {
            prop_assert_eq!(r.lambda, 0.0);
        }
    }

    #[test]
    fn max_flow_certifies_with_its_cut(seed in any::<u64>(), n in 4usize..120) {
        let inst = generate_instance(n, seed, XiMode::Constant(2.0)).unwrap();
        let net = FlowNetwork::from_graph(&build_graph(&inst, 1.0).unwrap());
        let left: Vec<usize> = (0..n).filter(|&v| inst.nodes[v].x < 0.5).collect();
        let right: Vec<usize> = (0..n).filter(|&v| inst.nodes[v].x >= 0.5).collect();
        prop_assume!(!left.is_empty() && !right.is_empty());
        let r = max_flow(&net, &left, &right).unwrap();
        prop_assert_eq!(r.value, r.cut_capacity);
        let cut: f64 = r.cut_links.iter().map(|&k| net.links()[k].capacity).sum();
        prop_assert_eq!(cut, r.value);
    }
}
