//! Maximum flow from every node left of the cut to every node right of it,
//! per node, against sqrt(n) ln^{3/2} n / n.

use netcap::flow::{max_flow, FlowNetwork};
use netcap::geometry::{build_graph, generate_instance, XiMode};

fn main() -> netcap::Result<()> {
    for n in [500, 1000, 2000, 4000] {
        let inst = generate_instance(n, 7, XiMode::LogLog)?;
        let net = FlowNetwork::from_graph(&build_graph(&inst, 1.0)?);
        let (left, right): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| inst.nodes[i].is_left());
        let r = max_flow(&net, &left, &right)?;
        let nf = n as f64;
        let nu = r.value / nf;
        println!(
            "n = {n:>5}: flow {:>6} = cut {:>6}, nu = {nu:.4}, nu sqrt(n)/ln^1.5 n = {:.4}",
            r.value,
            r.cut_capacity,
            nu * nf.sqrt() / nf.ln().powf(1.5)
        );
    }
    Ok(())
}
