use crate::error::{Error, Result};
use crate::numerics::linalg::{spd_inv_sqrt_with, spd_solve, symmetrize};
use crate::numerics::{Mat, Tolerances};
use crate::scalar::Scalar;

/// Symmetric part `(B + Bᵀ)/2`, exactly symmetric.
pub fn sym<T: Scalar>(b: &Mat<T>) -> Result<Mat<T>> {
    if !b.is_square() {
        return Err(Error::dim("sym", "square matrix", format!("{}x{}", b.rows(), b.cols())));
    }
    Ok(symmetrize(b))
}

/// `XᵀMX`, symmetrized.
pub fn gram<T: Scalar>(x: &Mat<T>, m: &Mat<T>) -> Mat<T> {
    symmetrize(&x.tr_matmul(&m.matmul(x)))
}

pub fn project_gstiefel<T: Scalar>(x: &Mat<T>, m: &Mat<T>) -> Result<Mat<T>> {
    project_gstiefel_with(x, m, &Tolerances::default())
}

/// Projection onto `{Y : YᵀMY = I}` in closed form `X (XᵀMX)^{-1/2}`.
pub fn project_gstiefel_with<T: Scalar>(x: &Mat<T>, m: &Mat<T>, tol: &Tolerances) -> Result<Mat<T>> {
    if m.rows() != x.rows() || !m.is_square() {
        return Err(Error::dim(
            "project_gstiefel",
            format!("{0}x{0} constraint matrix", x.rows()),
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    let g = gram(x, m);
    let inv_sqrt = spd_inv_sqrt_with(&g, tol).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::RankDeficient,
        other => other,
    })?;
    Ok(x.matmul(&inv_sqrt))
}

/// Riemannian gradient `M⁻¹G − X sym(XᵀG)` under the metric induced by `M`.
pub fn riemannian_grad<T: Scalar>(x: &Mat<T>, g: &Mat<T>, m: &Mat<T>) -> Result<Mat<T>> {
    if x.shape() != g.shape() {
        return Err(Error::dim(
            "riemannian_grad",
            format!("{}x{} gradient", x.rows(), x.cols()),
            format!("{}x{}", g.rows(), g.cols()),
        ));
    }
    let minv_g = spd_solve(m, g)?;
    let s = symmetrize(&x.tr_matmul(g));
    Ok(&minv_g - &x.matmul(&s))
}

/// `‖XᵀMX − I‖_F`.
pub fn feasibility_residual<T: Scalar>(x: &Mat<T>, m: &Mat<T>) -> T {
    let p = x.cols();
    (&gram(x, m) - &Mat::identity(p)).fro_norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_examples() {
        let b = Mat::<f64>::from_rows(&[[0.0, 2.0], [0.0, 0.0]]);
        assert_eq!(sym(&b).unwrap(), Mat::from_rows(&[[0.0, 1.0], [1.0, 0.0]]));
        assert_eq!(sym(&Mat::<f64>::identity(3)).unwrap(), Mat::identity(3));
        assert!(sym(&Mat::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn projection_removes_scale() {
        let m = Mat::<f64>::from_diag(&[4.0, 1.0, 9.0]);
        let x0 = Mat::from_rows(&[[0.5, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        assert!(feasibility_residual(&x0, &m) < 1e-15);
        let y = project_gstiefel(&x0.scale(2.0), &m).unwrap();
        assert!((&y - &x0).max_abs() < 1e-15);
        let fixed = project_gstiefel(&x0, &m).unwrap();
        assert!((&fixed - &x0).max_abs() < 1e-12);
    }

    #[test]
    fn projection_of_rank_deficient_input_fails() {
        let m = Mat::<f64>::identity(3);
        let x = Mat::from_rows(&[[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]]);
        assert!(matches!(project_gstiefel(&x, &m), Err(Error::RankDeficient)));
    }

    #[test]
    fn normal_gradient_is_annihilated() {
        let m = Mat::<f64>::from_diag(&[4.0, 1.0, 9.0]);
        let x = Mat::from_rows(&[[0.5, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        let g = m.matmul(&x);
        assert!(riemannian_grad(&x, &g, &m).unwrap().max_abs() < 1e-15);
        let zero = Mat::zeros(3, 2);
        assert_eq!(riemannian_grad(&x, &zero, &m).unwrap(), zero);
    }
}
