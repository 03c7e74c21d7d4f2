//! Quadratic-cost receding-horizon control: the cost functional `J`, a
//! bounded single-shooting solver, and the nominal and oracle controllers
//! built on it.

mod cost;
mod policy;
mod solver;

pub use cost::{total_cost, CostSpec};
pub use policy::{nominal_policy, oracle_policy, MpcPolicy, SolveStats};
pub use solver::{predicted_cost, predicted_cost_and_gradient, solve_ocp, OcpOptions, OcpSolution, SolveStatus};

pub(crate) use cost::diag;
