//! Dense kernels and generalized-Stiefel primitives.

mod eigen;
mod linalg;
mod manifold;
mod mat;

pub use eigen::{sym_eig, sym_eig_with, SymEigen};
pub use linalg::{cholesky, fro_norm, spd_inv_sqrt, spd_inv_sqrt_with, spd_solve, spec_norm, thin_q};
pub use manifold::{feasibility_residual, gram, project_gstiefel, project_gstiefel_with, riemannian_grad, sym};
pub use mat::Mat;

pub(crate) use eigen::asymmetry;
pub(crate) use linalg::symmetrize;

/// Relative tolerances used by the spectral kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest accepted `max|S − Sᵀ|` relative to `‖S‖_F` for symmetric inputs.
    pub symmetry: f64,
    /// Eigenvalues at or below `spd_relative · ‖S‖₂` are treated as zero.
    pub spd_relative: f64,
}

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const SPD_RELATIVE_TOL: f64 = 1e-12;

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            symmetry: SYMMETRY_TOL,
            spd_relative: SPD_RELATIVE_TOL,
        }
    }
}
