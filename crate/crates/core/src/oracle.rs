//! Independent ground truth: the centralized CCA optimum from a symmetric
//! eigenproblem, a penalty gradient-descent solver, and finite differences.

use log::warn;

use crate::engine::penalty_gradient;
use crate::error::Result;
use crate::numerics::{feasibility_residual, spd_inv_sqrt, sym_eig, symmetrize, Mat};
use crate::problem::Problem;
use crate::scalar::Scalar;

/// Eigen-gaps at or below this are reported as a non-unique optimal subspace.
pub const EIGEN_GAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CcaSolution<T> {
    pub x_star: Mat<T>,
    pub objective_star: T,
    pub top_eigvals: Vec<T>,
    /// `λ_p − λ_{p+1}`, or `None` when `p = n`.
    pub eigen_gap: Option<T>,
}

/// Minimizes `−½ tr(XᵀΣX)` over `XᵀMX = I` through the top-`p` eigenpairs of
/// `M^{-1/2} Σ M^{-1/2}`, with `Σ = −∇²f` recovered from the (quadratic) problem.
pub fn solve_cca_centralized<T: Scalar>(problem: &Problem<T>) -> Result<CcaSolution<T>> {
    let n = problem.n();
    let p = problem.p();
    // ∇f(X) = −ΣX, so −∇f(I) = Σ for the trace-quadratic CCA objective.
    let sigma = symmetrize(&problem.gradient(&Mat::identity(n)).scale(-T::one()));
    solve_trace_quadratic(&sigma, problem.constraint(), p)
}

/// Top-`p` generalized eigenvectors of `(Σ, M)` normalized so `XᵀMX = I`.
pub fn solve_trace_quadratic<T: Scalar>(sigma: &Mat<T>, m: &Mat<T>, p: usize) -> Result<CcaSolution<T>> {
    let m_inv_sqrt = spd_inv_sqrt(m)?;
    let t = symmetrize(&m_inv_sqrt.matmul(&sigma.matmul(&m_inv_sqrt)));
    let eig = sym_eig(&t)?;
    let top: Vec<T> = eig.values[..p].to_vec();
    let eigen_gap = eig.values.get(p).map(|&next| eig.values[p - 1] - next);
    if let Some(gap) = eigen_gap {
        if gap <= T::of(EIGEN_GAP_TOL) {
            warn!("eigen-gap {gap} at p = {p}: the optimal subspace is not unique");
        }
    }
    let x_star = m_inv_sqrt.matmul(&eig.vectors.col_block(0, p));
    let objective_star = -T::half() * top.iter().copied().sum::<T>();
    Ok(CcaSolution {
        x_star,
        objective_star,
        top_eigvals: top,
        eigen_gap,
    })
}

/// Central differences `(f(X + tE_ij) − f(X − tE_ij)) / 2t`, entry by entry.
pub fn fd_gradient<T: Scalar>(func: impl Fn(&Mat<T>) -> T, x: &Mat<T>, step: T) -> Mat<T> {
    let mut probe = x.clone();
    Mat::from_fn(x.rows(), x.cols(), |i, j| {
        let orig = probe[(i, j)];
        probe[(i, j)] = orig + step;
        let plus = func(&probe);
        probe[(i, j)] = orig - step;
        let minus = func(&probe);
        probe[(i, j)] = orig;
        (plus - minus) / (step + step)
    })
}

/// Central difference of `func` along direction `dir`.
pub fn fd_directional<T: Scalar>(func: impl Fn(&Mat<T>) -> T, x: &Mat<T>, dir: &Mat<T>, step: T) -> T {
    let mut plus = x.clone();
    plus.axpy(step, dir);
    let mut minus = x.clone();
    minus.axpy(-step, dir);
    (func(&plus) - func(&minus)) / (step + step)
}

#[derive(Debug, Clone)]
pub struct DescentOutcome<T> {
    pub x: Mat<T>,
    pub iterations: usize,
    pub gradient_norm: T,
    pub converged: bool,
}

/// Plain gradient descent on the penalty `h` with its exact gradient, stopped
/// once `‖∇h‖ ≤ tol`.
pub fn penalty_gradient_descent<T: Scalar>(
    problem: &Problem<T>,
    x0: &Mat<T>,
    beta: T,
    eta: T,
    tol: T,
    max_iters: usize,
) -> DescentOutcome<T> {
    let mut x = x0.clone();
    let mut grad = penalty_gradient(&x, problem, beta);
    let mut iterations = 0;
    while grad.fro_norm() > tol && iterations < max_iters {
        x.axpy(-eta, &grad);
        grad = penalty_gradient(&x, problem, beta);
        iterations += 1;
    }
    let gradient_norm = grad.fro_norm();
    DescentOutcome {
        x,
        iterations,
        gradient_norm,
        converged: gradient_norm <= tol,
    }
}

/// `‖XᵀMX − I‖` for the solution, a convenience for callers checking feasibility.
pub fn solution_feasibility<T: Scalar>(sol: &CcaSolution<T>, problem: &Problem<T>) -> T {
    feasibility_residual(&sol.x_star, problem.constraint())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_of_linear_and_quadratic() {
        let c = Mat::<f64>::from_rows(&[[1.0, -2.0], [0.5, 3.0]]);
        let x = Mat::from_rows(&[[0.3, 0.1], [-0.7, 2.0]]);
        let g = fd_gradient(|y: &Mat<f64>| c.dot(y), &x, 1e-3);
        assert!((&g - &c).max_abs() < 1e-9);
        let g = fd_gradient(|y: &Mat<f64>| 0.5 * y.fro_norm_sq(), &x, 1e-4);
        assert!((&g - &x).max_abs() < 1e-7);
    }

    #[test]
    fn identical_sigma_and_m_give_unit_correlations() {
        let m = Mat::<f64>::from_rows(&[[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 3.0]]);
        let sol = solve_trace_quadratic(&m, &m, 2).unwrap();
        assert!(sol.top_eigvals.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!((sol.objective_star + 1.0).abs() < 1e-12);
        assert!(feasibility_residual(&sol.x_star, &m) < 1e-12);
    }
}
