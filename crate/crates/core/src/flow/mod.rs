//! Flow problems on capacitated networks: exact maximum flow, approximate
//! maximum concurrent multicommodity flow, an exact small-instance oracle,
//! and a feasibility checker.

mod concurrent;
mod exact;
mod maxflow;
mod network;
pub mod simplex;
mod solution;

pub use concurrent::{concurrent_flow_approx, concurrent_flow_approx_with, ConcurrentFlowResult, SolverOptions};
pub use exact::{
    concurrent_flow_exact, concurrent_flow_feasible, enumerate_simple_paths, ExactFlowResult, EXACT_NODE_LIMIT,
    EXACT_PATH_BUDGET,
};
pub use maxflow::{max_flow, MaxFlowResult};
pub use network::{CommoditySet, FlowNetwork, Link};

pub use solution::{verify_solution, FlowSolution, FEASIBILITY_TOL};
