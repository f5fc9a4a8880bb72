use crate::engine::direction::{local_direction, penalty_h};
use crate::engine::{AgentState, IterationLog, Metrics, RunConfig, RunResult, ROUNDS_PER_ITERATION};
use crate::error::{Error, Result};
use crate::network::MixingMatrix;
use crate::numerics::{symmetrize, Mat};
use crate::problem::Problem;
use crate::scalar::Scalar;

/// `X_i ← Σ_j W(i,j)(X_j − ηH_j)` for all agents at once.
pub fn mix_step<T: Scalar>(states: &mut [AgentState<T>], w: &MixingMatrix<T>, eta: T) {
    let sent: Vec<Mat<T>> = states
        .iter()
        .map(|s| {
            let mut y = s.x.clone();
            y.axpy(-eta, &s.h);
            y
        })
        .collect();
    for (i, s) in states.iter_mut().enumerate() {
        s.x = w.gather(i, &sent);
    }
}

/// Dynamic average consensus on both trackers:
/// `U_i ← Σ_j W(i,j)(U_j + G_j⁺ − G_j)` and `V_i ← Σ_j W(i,j)(V_j + D_j⁺ − D_j)`.
pub fn track_step<T: Scalar>(
    states: &mut [AgentState<T>],
    w: &MixingMatrix<T>,
    fresh_grads: &[Mat<T>],
    fresh_mx: &[Mat<T>],
    old_grads: &[Mat<T>],
    old_mx: &[Mat<T>],
) {
    let increment = |base: &Mat<T>, new: &Mat<T>, old: &Mat<T>| {
        let mut delta = new - old;
        delta += base;
        delta
    };
    let sent_u: Vec<Mat<T>> = states
        .iter()
        .enumerate()
        .map(|(j, s)| increment(&s.u, &fresh_grads[j], &old_grads[j]))
        .collect();
    let sent_v: Vec<Mat<T>> = states
        .iter()
        .enumerate()
        .map(|(j, s)| increment(&s.v, &fresh_mx[j], &old_mx[j]))
        .collect();
    for (i, s) in states.iter_mut().enumerate() {
        s.u = w.gather(i, &sent_u);
        s.v = w.gather(i, &sent_v);
    }
}

struct Means<T> {
    x: Mat<T>,
    u: Mat<T>,
    v: Mat<T>,
}

fn means<T: Scalar>(states: &[AgentState<T>]) -> Means<T> {
    Means {
        x: Mat::mean_of(states.iter().map(|s| &s.x)),
        u: Mat::mean_of(states.iter().map(|s| &s.u)),
        v: Mat::mean_of(states.iter().map(|s| &s.v)),
    }
}

fn metrics_from<T: Scalar>(states: &[AgentState<T>], avg: &Means<T>) -> Metrics {
    let d = T::of(states.len() as f64);
    let p = avg.x.cols();
    // dŪ and dV̄ estimate ∇f(X̄) and MX̄.
    let g = avg.u.scale(d);
    let mx = avg.v.scale(d);
    let mut stat = g.clone();
    stat -= &mx.matmul(&symmetrize(&avg.x.tr_matmul(&g)));
    let mut feas = avg.x.tr_matmul(&mx);
    for i in 0..p {
        feas[(i, i)] -= T::one();
    }
    let consensus: T = states.iter().map(|s| (&s.x - &avg.x).fro_norm()).sum::<T>() / d;
    Metrics {
        stat_viol: stat.fro_norm().as_f64(),
        consensus_err: consensus.as_f64(),
        feas_viol: feas.fro_norm().as_f64(),
    }
}

/// Stationarity violation `‖dŪ − d²V̄ sym(X̄ᵀŪ)‖`, consensus error
/// `Σ‖X_i − X̄‖/d` and feasibility violation `‖dX̄ᵀV̄ − I‖`.
///
/// The trackers average the local quantities, so the factors of `d` turn
/// `Ū`, `V̄` back into estimates of `∇f(X̄)` and `MX̄`.
pub fn metrics<T: Scalar>(states: &[AgentState<T>]) -> Metrics {
    metrics_from(states, &means(states))
}

fn merit_from<T: Scalar>(states: &[AgentState<T>], avg: &Means<T>, problem: &Problem<T>, beta: T, rho: T) -> T {
    let spread = |pick: fn(&AgentState<T>) -> &Mat<T>, mean: &Mat<T>| -> T {
        states.iter().map(|s| (pick(s) - mean).fro_norm_sq()).sum()
    };
    penalty_h(&avg.x, problem, beta)
        + spread(|s| &s.x, &avg.x)
        + rho * (spread(|s| &s.u, &avg.u) + spread(|s| &s.v, &avg.v))
}

/// Merit `h(X̄) + ‖(I−J)X‖² + ρ‖(I−J)U‖² + ρ‖(I−J)V‖²` over the stacked blocks.
pub fn merit<T: Scalar>(states: &[AgentState<T>], problem: &Problem<T>, beta: T, rho: T) -> T {
    merit_from(states, &means(states), problem, beta, rho)
}

/// Synchronous simulator of the decentralized iteration.
///
/// Per-agent gradients `∇f_j(X_j)` and products `M_jX_j` are evaluated once
/// per iteration and cached for the next tracking increment.
pub struct Cdadt<'a, T: Scalar> {
    problem: &'a Problem<T>,
    mixing: &'a MixingMatrix<T>,
    config: RunConfig,
    eta: T,
    beta: T,
    states: Vec<AgentState<T>>,
    grads: Vec<Mat<T>>,
    products: Vec<Mat<T>>,
    iteration: usize,
}

impl<'a, T: Scalar> Cdadt<'a, T> {
    /// All agents start from `x_init` with `U_i = ∇f_i(x_init)`, `V_i = M_i x_init`.
    pub fn new(
        problem: &'a Problem<T>,
        mixing: &'a MixingMatrix<T>,
        x_init: &Mat<T>,
        config: RunConfig,
    ) -> Result<Self> {
        config.validate()?;
        let d = problem.agents();
        if mixing.agents() != d {
            return Err(Error::dim(
                "Cdadt::new",
                format!("{d}x{d} mixing matrix"),
                format!("{0}x{0}", mixing.agents()),
            ));
        }
        if x_init.shape() != (problem.n(), problem.p()) {
            return Err(Error::dim(
                "Cdadt::new",
                format!("{}x{} initial point", problem.n(), problem.p()),
                format!("{}x{}", x_init.rows(), x_init.cols()),
            ));
        }
        if !x_init.is_finite() {
            return Err(Error::NonFinite { what: "initial point" });
        }
        let grads: Vec<Mat<T>> = problem.components().iter().map(|c| c.gradient(x_init)).collect();
        let products: Vec<Mat<T>> = problem
            .components()
            .iter()
            .map(|c| c.constraint_product(x_init))
            .collect();
        let states = grads
            .iter()
            .zip(&products)
            .map(|(g, mx)| AgentState {
                x: x_init.clone(),
                u: g.clone(),
                v: mx.clone(),
                h: Mat::zeros(problem.n(), problem.p()),
            })
            .collect();
        Ok(Cdadt {
            problem,
            mixing,
            config,
            eta: T::of(config.eta),
            beta: T::of(config.beta),
            states,
            grads,
            products,
            iteration: 0,
        })
    }

    pub fn states(&self) -> &[AgentState<T>] {
        &self.states
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Cached `∇f_j(X_j)` for the current iterate.
    pub fn cached_gradients(&self) -> &[Mat<T>] {
        &self.grads
    }

    /// Cached `M_jX_j` for the current iterate.
    pub fn cached_products(&self) -> &[Mat<T>] {
        &self.products
    }

    /// Runs one full superstep.
    pub fn step(&mut self) -> Result<()> {
        let d = self.states.len();
        for s in self.states.iter_mut() {
            s.h = local_direction(s, d, self.beta);
        }

        mix_step(&mut self.states, self.mixing, self.eta);

        let comps = self.problem.components();
        let (fresh_grads, fresh_mx): (Vec<Mat<T>>, Vec<Mat<T>>) = comps
            .iter()
            .zip(&self.states)
            .map(|(c, s)| c.gradient_and_product(&s.x))
            .unzip();
        track_step(
            &mut self.states,
            self.mixing,
            &fresh_grads,
            &fresh_mx,
            &self.grads,
            &self.products,
        );
        self.grads = fresh_grads;
        self.products = fresh_mx;
        self.iteration += 1;

        if self.states.iter().all(AgentState::is_finite) {
            Ok(())
        } else {
            Err(Error::Diverged {
                iteration: self.iteration,
            })
        }
    }

    pub fn metrics(&self) -> Metrics {
        metrics(&self.states)
    }

    pub fn merit(&self) -> T {
        merit(&self.states, self.problem, self.beta, T::of(self.config.rho))
    }

    /// Log record for the current iterate.
    pub fn log_entry(&self) -> Result<IterationLog> {
        let avg = means(&self.states);
        let m = metrics_from(&self.states, &avg);
        let objective = self.problem.objective(&avg.x).as_f64();
        let merit = self
            .config
            .record_merit
            .then(|| merit_from(&self.states, &avg, self.problem, self.beta, T::of(self.config.rho)).as_f64());
        let entry = IterationLog {
            iter: self.iteration,
            stat_viol: m.stat_viol,
            consensus_err: m.consensus_err,
            feas_viol: m.feas_viol,
            objective,
            merit,
        };
        let finite = [entry.stat_viol, entry.consensus_err, entry.feas_viol, entry.objective]
            .iter()
            .chain(entry.merit.iter())
            .all(|v| v.is_finite());
        if finite {
            Ok(entry)
        } else {
            Err(Error::Diverged {
                iteration: self.iteration,
            })
        }
    }

    /// Iterates until all three metrics meet their tolerances or
    /// `max_iters` iterations have run.
    pub fn run(self) -> Result<RunResult<T>> {
        self.run_observed(|_, _| {})
    }

    /// Like [`Cdadt::run`], calling `observe` after every logged iterate.
    pub fn run_observed(mut self, mut observe: impl FnMut(&IterationLog, &Self)) -> Result<RunResult<T>> {
        let mut logs = Vec::new();
        let converged = loop {
            let entry = self.log_entry()?;
            observe(&entry, &self);
            logs.push(entry);
            if entry.metrics().below(&self.config) {
                break true;
            }
            if self.iteration >= self.config.max_iters {
                break false;
            }
            self.step()?;
        };
        Ok(RunResult {
            logs,
            converged,
            iterations: self.iteration,
            rounds_of_communication: ROUNDS_PER_ITERATION * self.iteration,
            final_states: self.states,
        })
    }
}

/// Runs the decentralized iteration from a shared starting point.
pub fn run<T: Scalar>(
    problem: &Problem<T>,
    w: &MixingMatrix<T>,
    x_init: &Mat<T>,
    config: RunConfig,
) -> Result<RunResult<T>> {
    Cdadt::new(problem, w, x_init, config)?.run()
}
