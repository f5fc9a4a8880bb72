//! The constraint dissolving algorithm with double tracking (CDADT).
//!
//! Every agent keeps a local estimate `X_i`, a gradient tracker `U_i`, a
//! Jacobian tracker `V_i` and its current direction `H_i`. One iteration is a
//! synchronous superstep of three phases separated by barriers:
//!
//! 1. each agent assembles `H_i` from its own trackers,
//! 2. `X_i ← Σ_j W(i,j)(X_j − ηH_j)`,
//! 3. `U_i ← Σ_j W(i,j)(U_j + ∇f_j(X_j⁺) − ∇f_j(X_j))` and the analogous
//!    update of `V_i` with `M_jX_j`.
//!
//! Phases 2 and 3 each consume one communication round per tracked block,
//! three rounds per iteration in total.

mod cdadt;
mod direction;
mod tuning;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use cdadt::{merit, metrics, mix_step, run, track_step, Cdadt};
pub use direction::{
    cd_operator, centralized_h, centralized_step, direction_q, direction_s, local_direction, penalty_gradient,
    penalty_h,
};
pub use tuning::halve_stepsize;

use crate::error::{Error, Result};
use crate::numerics::{project_gstiefel, Mat};
use crate::problem::Problem;
use crate::scalar::Scalar;

/// Communication rounds spent per iteration (X, U and V exchanges).
pub const ROUNDS_PER_ITERATION: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState<T> {
    pub x: Mat<T>,
    pub u: Mat<T>,
    pub v: Mat<T>,
    pub h: Mat<T>,
}

impl<T: Scalar> AgentState<T> {
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.u.is_finite() && self.v.is_finite() && self.h.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub eta: f64,
    pub beta: f64,
    pub max_iters: usize,
    pub tol_stationarity: f64,
    pub tol_consensus: f64,
    pub tol_feasibility: f64,
    /// Weight of the tracker deviations in the merit function. Diagnostic only.
    pub rho: f64,
    pub record_merit: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eta: 1e-3,
            beta: 1.0,
            max_iters: 10_000,
            tol_stationarity: 1e-6,
            tol_consensus: 1e-6,
            tol_feasibility: 1e-6,
            rho: 1e-2,
            record_merit: false,
        }
    }
}

impl RunConfig {
    /// Sets all three stopping tolerances at once.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_stationarity = tol;
        self.tol_consensus = tol;
        self.tol_feasibility = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("eta", self.eta)?;
        positive("beta", self.beta)?;
        positive("tol_stationarity", self.tol_stationarity)?;
        positive("tol_consensus", self.tol_consensus)?;
        positive("tol_feasibility", self.tol_feasibility)?;
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rho must be nonnegative, got {}",
                self.rho
            )));
        }
        Ok(())
    }
}

/// The three tracked performance metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub stat_viol: f64,
    pub consensus_err: f64,
    pub feas_viol: f64,
}

impl Metrics {
    pub fn below(&self, cfg: &RunConfig) -> bool {
        self.stat_viol <= cfg.tol_stationarity
            && self.consensus_err <= cfg.tol_consensus
            && self.feas_viol <= cfg.tol_feasibility
    }

    pub fn max(&self) -> f64 {
        self.stat_viol.max(self.consensus_err).max(self.feas_viol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iter: usize,
    pub stat_viol: f64,
    pub consensus_err: f64,
    pub feas_viol: f64,
    pub objective: f64,
    pub merit: Option<f64>,
}

impl IterationLog {
    pub fn metrics(&self) -> Metrics {
        Metrics {
            stat_viol: self.stat_viol,
            consensus_err: self.consensus_err,
            feas_viol: self.feas_viol,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult<T> {
    pub logs: Vec<IterationLog>,
    pub final_states: Vec<AgentState<T>>,
    pub converged: bool,
    pub iterations: usize,
    pub rounds_of_communication: usize,
}

impl<T> RunResult<T> {
    pub fn last(&self) -> &IterationLog {
        self.logs.last().expect("a run logs at least iteration 0")
    }

    /// First logged iteration whose stationarity violation is at most `tol`.
    pub fn iterations_to_stationarity(&self, tol: f64) -> Option<usize> {
        self.logs.iter().find(|l| l.stat_viol <= tol).map(|l| l.iter)
    }

    /// First logged iteration with all three metrics at most `tol`.
    pub fn iterations_to_all(&self, tol: f64) -> Option<usize> {
        self.logs.iter().find(|l| l.metrics().max() <= tol).map(|l| l.iter)
    }
}

/// Shared starting point: a seeded Gaussian `n×p` matrix projected onto
/// `{X : XᵀMX = I}` with the aggregate `M`.
pub fn default_init<T: Scalar>(problem: &Problem<T>, seed: u64) -> Result<Mat<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = Mat::from_fn(problem.n(), problem.p(), |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        T::of(z)
    });
    project_gstiefel(&raw, problem.constraint())
}
