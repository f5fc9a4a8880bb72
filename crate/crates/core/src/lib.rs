//! Decentralized optimization under a generalized orthogonality constraint
//! `Σ_i XᵀM_iX = I_p` whose pieces `M_i` are private to the agents.
//!
//! The crate is generic over the scalar type ([`Scalar`], implemented for
//! `f32` and `f64`); the `*64` aliases at the root fix it to `f64`.
//!
//! - [`numerics`]: dense matrices, symmetric eigensolver, projections.
//! - [`network`]: topologies, Metropolis mixing matrices, λ.
//! - [`problem`]: local components, distributed CCA, CSV matrices.
//! - [`engine`]: the double-tracking iteration, metrics and merit.
//! - [`oracle`]: centralized ground truth and finite differences.

pub mod engine;
pub mod error;
pub mod network;
pub mod numerics;
pub mod oracle;
pub mod problem;
mod scalar;

pub use engine::{AgentState, Cdadt, IterationLog, Metrics, RunConfig, RunResult};
pub use error::{Error, Result};
pub use network::{MixingMatrix, Topology};
pub use numerics::Mat;
pub use problem::{CcaData, LocalComponent, Problem};
pub use scalar::Scalar;

pub type Mat64 = Mat<f64>;
pub type Mat32 = Mat<f32>;
pub type Problem64 = Problem<f64>;
pub type MixingMatrix64 = MixingMatrix<f64>;
pub type CcaData64 = CcaData<f64>;
pub type AgentState64 = AgentState<f64>;
pub type RunResult64 = RunResult<f64>;
