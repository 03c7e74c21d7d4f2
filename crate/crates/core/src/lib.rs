//! Simulation-based litmus test for whether learned control can beat
//! model predictive control on a given system.
//!
//! The test has two parts. The *knowledge advantage* `eta` compares a
//! nominal MPC, which plans with zero disturbance, against an oracle MPC
//! that previews the realized disturbance inside its horizon, over
//! Monte-Carlo scenarios drawn from an identified disturbance set. If the
//! oracle barely helps, better knowledge of the uncertainty is worth
//! nothing and model-based control suffices. Otherwise the *learnability*
//! `rho`, a randomized dependence coefficient between one-step prediction
//! residuals and the state-input pairs that produced them, tells whether
//! the uncertainty is systematic (learnable bias) or random noise.

// `!(v > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformance;
pub mod error;
pub mod interval;
pub mod knowledge;
pub mod learnability;
pub mod models;
pub mod mpc;
pub mod pipeline;
pub mod random;
pub mod rdc;
pub mod trajectory;

pub use error::{Error, Result};
pub use interval::{interval_hull, IntervalBox};
pub use random::RandomStream;
pub use trajectory::Trajectory;
