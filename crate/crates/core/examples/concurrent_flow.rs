//! Approximate maximum concurrent flow, checked against the exact path LP on
//! a small instance and run on a larger one.

use netcap::flow::{concurrent_flow_approx, concurrent_flow_exact, verify_solution, CommoditySet, FlowNetwork};
use netcap::geometry::{build_graph, generate_instance, XiMode};

fn main() -> netcap::Result<()> {
    let eps = 0.05;

    let small = generate_instance(8, 3, XiMode::Constant(4.0))?;
    let net = FlowNetwork::from_graph(&build_graph(&small, 1.0)?);
    let comm = CommoditySet::new(small.commodities[..3].to_vec());
    let exact = concurrent_flow_exact(&net, &comm)?;
    let approx = concurrent_flow_approx(&net, &comm, eps)?;
    println!(
        "8 nodes, 3 commodities: exact {} ({} paths), approx {:.6}, ratio {:.4}",
        exact.lambda_exact,
        exact.path_count,
        approx.lambda,
        approx.lambda / exact.lambda
    );

    let inst = generate_instance(400, 3, XiMode::Grid(2.0))?;
    let net = FlowNetwork::from_graph(&build_graph(&inst, 1.0)?);
    let comm = CommoditySet::from_instance(&inst, true);
    let r = concurrent_flow_approx(&net, &comm, eps)?;
    println!(
        "400 nodes, {} left-to-right commodities: lambda {:.4} <= optimum <= {:.4}, certified {}, {} phases",
        comm.len(),
        r.lambda,
        r.upper_bound,
        r.certified,
        r.iterations
    );
    println!("solution feasible: {}", verify_solution(&r.solution, &net)?);
    Ok(())
}
