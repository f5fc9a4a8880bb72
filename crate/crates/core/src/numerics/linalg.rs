use crate::error::{Error, Result};
use crate::numerics::eigen::sym_eig_with;
use crate::numerics::{Mat, Tolerances};
use crate::scalar::Scalar;

pub fn fro_norm<T: Scalar>(b: &Mat<T>) -> T {
    b.fro_norm()
}

/// Largest singular value, from the top eigenvalue of `BᵀB` (or `BBᵀ`,
/// whichever is smaller).
pub fn spec_norm<T: Scalar>(b: &Mat<T>) -> T {
    if b.rows() == 0 || b.cols() == 0 {
        return T::zero();
    }
    let gram = if b.cols() <= b.rows() {
        b.tr_matmul(b)
    } else {
        b.matmul_tr(b)
    };
    let gram = symmetrize(&gram);
    let top = sym_eig_with(&gram, &Tolerances::default())
        .expect("Gram matrices are symmetric")
        .max();
    top.max(T::zero()).sqrt()
}

/// Exact symmetrization by averaging mirrored entries once.
pub(crate) fn symmetrize<T: Scalar>(s: &Mat<T>) -> Mat<T> {
    let n = s.rows();
    let mut out = s.clone();
    for j in 0..n {
        for i in j + 1..n {
            let avg = (s[(i, j)] + s[(j, i)]) * T::half();
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    out
}

pub fn spd_inv_sqrt<T: Scalar>(s: &Mat<T>) -> Result<Mat<T>> {
    spd_inv_sqrt_with(s, &Tolerances::default())
}

/// `S^{-1/2}` on the symmetric positive branch.
pub fn spd_inv_sqrt_with<T: Scalar>(s: &Mat<T>, tol: &Tolerances) -> Result<Mat<T>> {
    let eig = sym_eig_with(s, tol)?;
    let threshold = T::of(tol.spd_relative) * eig.max().abs();
    let min = eig.min();
    if min.is_nan() || min <= threshold || eig.max() <= T::zero() {
        return Err(Error::NotPositiveDefinite {
            min_eig: min.as_f64(),
            threshold: threshold.as_f64(),
        });
    }
    Ok(eig.reconstruct_with(|lam| T::one() / lam.sqrt()))
}

/// Lower Cholesky factor `L` with `S = LLᵀ`.
pub fn cholesky<T: Scalar>(s: &Mat<T>) -> Result<Mat<T>> {
    if !s.is_square() {
        return Err(Error::dim(
            "cholesky",
            "square matrix",
            format!("{}x{}", s.rows(), s.cols()),
        ));
    }
    let n = s.rows();
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut diag = s[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if diag.is_nan() || diag <= T::zero() {
            return Err(Error::NotPositiveDefinite {
                min_eig: diag.as_f64(),
                threshold: 0.0,
            });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut acc = s[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = acc / ljj;
        }
    }
    Ok(l)
}

/// Solves `S X = B` for SPD `S` through its Cholesky factor.
pub fn spd_solve<T: Scalar>(s: &Mat<T>, b: &Mat<T>) -> Result<Mat<T>> {
    if s.rows() != b.rows() {
        return Err(Error::dim(
            "spd_solve",
            format!("{} rows", s.rows()),
            format!("{} rows", b.rows()),
        ));
    }
    let l = cholesky(s)?;
    let n = s.rows();
    let mut x = b.clone();
    for c in 0..b.cols() {
        let col = x.col_mut(c);
        for i in 0..n {
            let mut acc = col[i];
            for k in 0..i {
                acc -= l[(i, k)] * col[k];
            }
            col[i] = acc / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut acc = col[i];
            for k in i + 1..n {
                acc -= l[(k, i)] * col[k];
            }
            col[i] = acc / l[(i, i)];
        }
    }
    Ok(x)
}

/// Orthonormal basis `Q` (`m×k`, `k = min(m, n)`) of the column space of `a`,
/// from Householder QR.
pub fn thin_q<T: Scalar>(a: &Mat<T>) -> Mat<T> {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v: Vec<T> = (j..m).map(|i| r[(i, j)]).collect();
        let alpha = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        let alpha = if v[0] > T::zero() { -alpha } else { alpha };
        v[0] -= alpha;
        let vnorm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        if vnorm > T::zero() {
            v.iter_mut().for_each(|x| *x /= vnorm);
            for c in j..n {
                let proj: T = v.iter().enumerate().map(|(t, &vi)| vi * r[(j + t, c)]).sum();
                let two_proj = proj + proj;
                for (t, &vi) in v.iter().enumerate() {
                    r[(j + t, c)] -= two_proj * vi;
                }
            }
        }
        reflectors.push(v);
    }
    let mut q = Mat::from_fn(m, k, |i, j| if i == j { T::one() } else { T::zero() });
    for (j, v) in reflectors.iter().enumerate().rev() {
        for c in 0..k {
            let proj: T = v.iter().enumerate().map(|(t, &vi)| vi * q[(j + t, c)]).sum();
            let two_proj = proj + proj;
            for (t, &vi) in v.iter().enumerate() {
                q[(j + t, c)] -= two_proj * vi;
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solve_round_trip() {
        let s = Mat::<f64>::from_rows(&[[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]]);
        let b = Mat::from_rows(&[[1.0, 0.0], [2.0, 1.0], [3.0, -1.0]]);
        let x = spd_solve(&s, &b).unwrap();
        assert!((&s.matmul(&x) - &b).max_abs() < 1e-14);
        assert!(cholesky(&Mat::<f64>::from_rows(&[[1.0, 2.0], [2.0, 1.0]])).is_err());
    }

    #[test]
    fn thin_q_is_orthonormal_and_spans_input() {
        let a = Mat::<f64>::from_fn(6, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + (i == j) as u8 as f64);
        let q = thin_q(&a);
        assert_eq!(q.shape(), (6, 3));
        assert!((&q.tr_matmul(&q) - &Mat::identity(3)).max_abs() < 1e-14);
        // a = q qᵀ a
        let back = q.matmul(&q.tr_matmul(&a));
        assert!((&back - &a).max_abs() < 1e-13);
    }

    #[test]
    fn spec_norm_of_wide_matrix() {
        assert!((spec_norm(&Mat::<f64>::from_rows(&[[3.0, 4.0]])) - 5.0).abs() < 1e-14);
        assert_eq!(spec_norm(&Mat::<f64>::zeros(0, 3)), 0.0);
    }
}
