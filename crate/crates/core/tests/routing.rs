use netcap::flow::{verify_solution, CommoditySet, FlowNetwork};
use netcap::geometry::{build_graph, generate_instance, XiMode};
use netcap::routing::*;
use netcap::Error;
use proptest::prelude::*;

#[test]
fn grid_side_at_ten_thousand() {
    let inst = generate_instance(10_000, 0, XiMode::LogLog).unwrap();
    let g = build_grid(&inst, 2.0).unwrap();
    // sqrt(1e4 / 18.4207) = 23.30
    assert_eq!(g.m, 23);
    assert_eq!(g.side * 23.0, 1.0);
    assert_eq!(g.cells.iter().map(Vec::len).sum::<usize>(), 10_000);
}

// Each of the 529 cells is Binomial(1e4, 1/529); the band [1.84, 35.0] misses
// with probability 5.76e-4 per cell, so all cells land in it on about 73.7% of
// seeds. Full occupancy fails with probability 3.2e-6.
#[test]
fn cells_hold_order_log_n_nodes() {
    let n = 10_000;
    let target = DEFAULT_C_GRID * (n as f64).ln();
    let delta = 0.9;
    let (mut occupied, mut banded) = (0, 0);
    for seed in 0..100 {
        let inst = generate_instance(n, seed, XiMode::LogLog).unwrap();
        let g = build_grid(&inst, DEFAULT_C_GRID).unwrap();
        occupied += (g.min_occupancy >= 1) as usize;
        let lo = (1.0 - delta) * target;
        let hi = (1.0 + delta) * target;
        banded += g.cells.iter().all(|c| (lo..=hi).contains(&(c.len() as f64))) as usize;
    }
    assert!(occupied >= 99, "{occupied}/100 fully occupied");
    assert!((banded as f64 - 73.7).abs() <= 15.0, "{banded}/100 within the band");
}

#[test]
fn adjacent_cells_share_order_log_squared_links() {
    let n = 10_000;
    let inst = generate_instance(n, 4, XiMode::LogLog).unwrap();
    let g = build_grid(&inst, DEFAULT_C_GRID).unwrap();
    let scale = (DEFAULT_C_GRID * (n as f64).ln()).powi(2);
    let m = g.m;
    let (mut total, mut within) = (0, 0);
    for i in 0..m {
        for j in 0..m {
            for (a, b) in [(i, j + 1), (i + 1, j)] {
                if a < m && b < m {
                    let links = (g.nodes((i, j)).len() * g.nodes((a, b)).len()) as f64;
                    total += 1;
                    within += (0.25..=4.0).contains(&(links / scale)) as usize;
                }
            }
        }
    }
    assert!(within as f64 >= 0.95 * total as f64, "{within}/{total}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn routes_are_l_shaped_and_shortest(a in 0usize..30, b in 0usize..30, c in 0usize..30, d in 0usize..30) {
        let path = route_commodity((a, b), (c, d));
        prop_assert_eq!(path.len() - 1, a.abs_diff(c) + b.abs_diff(d));
        prop_assert_eq!(path[0], (a, b));
        prop_assert_eq!(*path.last().unwrap(), (c, d));
        let mut vertical = false;
        for w in path.windows(2) {
            let (p, q) = (w[0], w[1]);
            prop_assert_eq!(p.0.abs_diff(q.0) + p.1.abs_diff(q.1), 1);
            if p.0 != q.0 {
                vertical = true;
            } else {
                prop_assert!(!vertical, "horizontal move after a vertical one");
            }
        }
    }

    #[test]
    fn loads_respect_strip_bound_and_route_feasibly(seed in any::<u64>(), n in 300usize..1500) {
        let inst = generate_instance(n, seed, XiMode::Grid(DEFAULT_C_GRID)).unwrap();
        let g = build_grid(&inst, DEFAULT_C_GRID).unwrap();
        let comm = CommoditySet::from_instance(&inst, true);
        let loads = match compute_loads(&g, &inst, &comm) {
            Ok(l) => l,
            Err(Error::EmptyCell { i, j }) => {
                prop_assert!(g.nodes((i, j)).is_empty());
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(loads.max_vertical_load <= loads.strip_bound);
        prop_assert_eq!(loads.max_load, *loads.links.values().max().unwrap());
        let gamma = achievable_throughput(&loads, 1.0).unwrap();
        let net = FlowNetwork::from_graph(&build_graph(&inst, 1.0).unwrap());
        let sol = routed_flow(&g, &inst, &comm, &net, gamma).unwrap();
        prop_assert!(verify_solution(&sol, &net).unwrap());
        prop_assert!(sol.lambdas.iter().all(|&l| (l - gamma).abs() <= 1e-9));
    }
}
