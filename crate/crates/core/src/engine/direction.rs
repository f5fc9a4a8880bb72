//! Search directions: the constraint-dissolving penalty, its exact gradient,
//! the approximate direction `H = S + βQ`, and its per-agent separable form.

use crate::engine::AgentState;
use crate::error::{Error, Result};
use crate::numerics::{symmetrize, Mat};
use crate::problem::Problem;
use crate::scalar::Scalar;

/// `½ X (3I − gram)`; with `gram = XᵀMX` this is the constraint dissolving
/// operator.
pub fn cd_operator<T: Scalar>(x: &Mat<T>, gram: &Mat<T>) -> Result<Mat<T>> {
    let p = x.cols();
    if gram.shape() != (p, p) {
        return Err(Error::dim(
            "cd_operator",
            format!("{p}x{p} gram"),
            format!("{}x{}", gram.rows(), gram.cols()),
        ));
    }
    let mut k = gram.scale(-T::half());
    for i in 0..p {
        k[(i, i)] += T::of(1.5);
    }
    Ok(x.matmul(&k))
}

/// `h(X) = f(A(X)) + (β/4) ‖XᵀMX − I‖²_F`.
pub fn penalty_h<T: Scalar>(x: &Mat<T>, problem: &Problem<T>, beta: T) -> T {
    let mx = problem.constraint_product(x);
    let gram = x.tr_matmul(&mx);
    let z = cd_operator(x, &gram).expect("gram is p×p");
    let mut residual = gram;
    for i in 0..x.cols() {
        residual[(i, i)] -= T::one();
    }
    problem.objective(&z) + beta * T::of(0.25) * residual.fro_norm_sq()
}

/// Exact `∇h(X)`; needs `∇f` at `A(X)` and hence the global `M`.
pub fn penalty_gradient<T: Scalar>(x: &Mat<T>, problem: &Problem<T>, beta: T) -> Mat<T> {
    let mx = problem.constraint_product(x);
    let gram = x.tr_matmul(&mx);
    let z = cd_operator(x, &gram).expect("gram is p×p");
    let g_at_z = problem.gradient(&z);
    let mut out = direction_s(x, &g_at_z, &mx);
    out.axpy(beta, &direction_q(x, &mx));
    out
}

/// `S(X) = ½ G (3I − XᵀMX) − MX sym(XᵀG)`.
pub fn direction_s<T: Scalar>(x: &Mat<T>, g: &Mat<T>, mx: &Mat<T>) -> Mat<T> {
    let p = x.cols();
    let gram = x.tr_matmul(mx);
    let mut k = gram.scale(-T::half());
    for i in 0..p {
        k[(i, i)] += T::of(1.5);
    }
    let s = symmetrize(&x.tr_matmul(g));
    let mut out = g.matmul(&k);
    out -= &mx.matmul(&s);
    out
}

/// `Q(X) = MX (XᵀMX − I)`.
pub fn direction_q<T: Scalar>(x: &Mat<T>, mx: &Mat<T>) -> Mat<T> {
    let mut gram = x.tr_matmul(mx);
    for i in 0..x.cols() {
        gram[(i, i)] -= T::one();
    }
    mx.matmul(&gram)
}

/// `H(X) = S(X) + βQ(X)` with the global gradient and constraint product.
pub fn centralized_h<T: Scalar>(x: &Mat<T>, problem: &Problem<T>, beta: T) -> Mat<T> {
    let g = problem.gradient(x);
    let mx = problem.constraint_product(x);
    let mut out = direction_s(x, &g, &mx);
    out.axpy(beta, &direction_q(x, &mx));
    out
}

/// One agent's direction from its trackers:
///
/// `H_i = (d/2) U_i (3I − d X_iᵀV_i) − d² V_i sym(X_iᵀU_i) + βd V_i (d X_iᵀV_i − I)`.
pub fn local_direction<T: Scalar>(state: &AgentState<T>, d: usize, beta: T) -> Mat<T> {
    let p = state.x.cols();
    let dd = T::of(d as f64);
    let xv = state.x.tr_matmul(&state.v);
    let xu_sym = symmetrize(&state.x.tr_matmul(&state.u));

    // U-coefficient: (d/2)(3I − d XᵀV)
    let mut ku = xv.scale(-dd * dd * T::half());
    // V-coefficient: βd(d XᵀV − I) − d² sym(XᵀU)
    let mut kv = xv.scale(beta * dd * dd);
    kv.axpy(-dd * dd, &xu_sym);
    for i in 0..p {
        ku[(i, i)] += T::of(1.5) * dd;
        kv[(i, i)] -= beta * dd;
    }
    let mut h = state.u.matmul(&ku);
    h += &state.v.matmul(&kv);
    h
}

/// `X − ηH(X)`: the centralized iteration the decentralized one emulates.
pub fn centralized_step<T: Scalar>(x: &Mat<T>, problem: &Problem<T>, eta: T, beta: T) -> Mat<T> {
    let mut next = x.clone();
    next.axpy(-eta, &centralized_h(x, problem, beta));
    next
}
