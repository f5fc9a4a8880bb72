use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{symmetrize, thin_q, Mat};
use crate::problem::{LocalComponent, Problem};
use crate::scalar::Scalar;

/// Two views `A` (`n_A×q`) and `B` (`m_B×q`) of the same `q` samples, with
/// the samples split column-wise across agents.
#[derive(Debug, Clone)]
pub struct CcaData<T: Scalar> {
    a: Mat<T>,
    b: Mat<T>,
    partition: Vec<usize>,
}

impl<T: Scalar> CcaData<T> {
    pub fn new(a: Mat<T>, b: Mat<T>, partition: Vec<usize>) -> Result<Self> {
        if a.cols() != b.cols() {
            return Err(Error::dim(
                "CcaData",
                format!("{} samples in B", a.cols()),
                format!("{}", b.cols()),
            ));
        }
        if partition.is_empty() || partition.contains(&0) {
            return Err(Error::InvalidParameter("partition entries must be >= 1".into()));
        }
        let total: usize = partition.iter().sum();
        if total != a.cols() {
            return Err(Error::InvalidParameter(format!(
                "partition sums to {total}, but there are {} samples",
                a.cols()
            )));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite { what: "CCA data" });
        }
        Ok(CcaData { a, b, partition })
    }

    /// Splits the columns uniformly across `d` agents.
    pub fn uniform(a: Mat<T>, b: Mat<T>, d: usize) -> Result<Self> {
        let partition = uniform_partition(a.cols(), d)?;
        Self::new(a, b, partition)
    }

    pub fn a(&self) -> &Mat<T> {
        &self.a
    }

    pub fn b(&self) -> &Mat<T> {
        &self.b
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn agents(&self) -> usize {
        self.partition.len()
    }

    /// `(A_i, B_i)` for agent `i`.
    pub fn agent_blocks(&self, i: usize) -> (Mat<T>, Mat<T>) {
        let start: usize = self.partition[..i].iter().sum();
        let end = start + self.partition[i];
        (self.a.col_block(start, end), self.b.col_block(start, end))
    }
}

/// `f(X) = −½ tr(XᵀΣX)` with constraint share `M`.
#[derive(Debug, Clone)]
pub struct TraceQuadratic<T: Scalar> {
    sigma: Mat<T>,
    constraint: Mat<T>,
    layout: Layout<T>,
}

#[derive(Debug, Clone)]
enum Layout<T> {
    Dense,
    /// `M = blockdiag(M₁, M₂)`.
    BlockDiagonal {
        split: usize,
        upper: Mat<T>,
        lower: Mat<T>,
    },
    /// `M = blockdiag(Σ₁₁, Σ₂₂) + rI`: both products share `Σ₁₁X₁` and `Σ₂₂X₂`.
    Cca {
        split: usize,
        s11: Mat<T>,
        s22: Mat<T>,
        s12: Mat<T>,
        s21: Mat<T>,
        ridge: T,
    },
}

impl<T: Scalar> TraceQuadratic<T> {
    pub fn new(sigma: Mat<T>, constraint: Mat<T>) -> Self {
        TraceQuadratic {
            sigma,
            constraint,
            layout: Layout::Dense,
        }
    }

    /// Same as [`TraceQuadratic::new`] for a constraint `blockdiag(M₁, M₂)`
    /// whose leading block is `split×split`; products use the blocks only.
    pub fn block_diagonal(sigma: Mat<T>, constraint: Mat<T>, split: usize) -> Self {
        let n = constraint.rows();
        let upper = constraint.block(0, 0, split, split);
        let lower = constraint.block(split, split, n - split, n - split);
        TraceQuadratic {
            sigma,
            constraint,
            layout: Layout::BlockDiagonal { split, upper, lower },
        }
    }

    /// The CCA share: `M = blockdiag(Σ₁₁, Σ₂₂) + ridge·I` built from `Σ`.
    pub fn cca(sigma: Mat<T>, split: usize, ridge: T) -> Self {
        let n = sigma.rows();
        let s11 = sigma.block(0, 0, split, split);
        let s22 = sigma.block(split, split, n - split, n - split);
        let s12 = sigma.block(0, split, split, n - split);
        let s21 = sigma.block(split, 0, n - split, split);
        let mut constraint = Mat::zeros(n, n);
        constraint.set_block(0, 0, &s11);
        constraint.set_block(split, split, &s22);
        for k in 0..n {
            constraint[(k, k)] += ridge;
        }
        TraceQuadratic {
            sigma,
            constraint,
            layout: Layout::Cca {
                split,
                s11,
                s22,
                s12,
                s21,
                ridge,
            },
        }
    }

    pub fn sigma(&self) -> &Mat<T> {
        &self.sigma
    }
}

impl<T: Scalar> LocalComponent<T> for TraceQuadratic<T> {
    fn value(&self, x: &Mat<T>) -> T {
        T::half() * x.dot(&self.gradient(x))
    }

    fn gradient(&self, x: &Mat<T>) -> Mat<T> {
        self.gradient_and_product(x).0
    }

    fn constraint(&self) -> &Mat<T> {
        &self.constraint
    }

    fn constraint_product(&self, x: &Mat<T>) -> Mat<T> {
        match &self.layout {
            Layout::Dense => self.constraint.matmul(x),
            Layout::BlockDiagonal { split, upper, lower } => {
                let mut out = Mat::zeros(x.rows(), x.cols());
                upper.matmul_acc_rows(x, 0, &mut out, 0);
                lower.matmul_acc_rows(x, *split, &mut out, *split);
                out
            }
            Layout::Cca { .. } => self.gradient_and_product(x).1,
        }
    }

    fn gradient_and_product(&self, x: &Mat<T>) -> (Mat<T>, Mat<T>) {
        match &self.layout {
            Layout::Cca {
                split,
                s11,
                s22,
                s12,
                s21,
                ridge,
            } => {
                let k = *split;
                let mut mx = Mat::zeros(x.rows(), x.cols());
                s11.matmul_acc_rows(x, 0, &mut mx, 0);
                s22.matmul_acc_rows(x, k, &mut mx, k);
                let mut g = mx.clone();
                s12.matmul_acc_rows(x, k, &mut g, 0);
                s21.matmul_acc_rows(x, 0, &mut g, k);
                g.scale_mut(-T::one());
                mx.axpy(*ridge, x);
                (g, mx)
            }
            _ => {
                let mut g = self.sigma.matmul(x);
                g.scale_mut(-T::one());
                (g, self.constraint_product(x))
            }
        }
    }
}

/// Ridge used when none is given: `1e-8 · tr(M)/n` with `M = blockdiag(AAᵀ, BBᵀ)`.
pub fn default_regularizer<T: Scalar>(data: &CcaData<T>) -> T {
    let n = data.a.rows() + data.b.rows();
    T::of(1e-8) * (data.a.fro_norm_sq() + data.b.fro_norm_sq()) / T::of(n as f64)
}

/// Distributed CCA: agent `i` holds `Σ_i = [A_i; B_i][A_i; B_i]ᵀ` and
/// `M_i = blockdiag(A_iA_iᵀ, B_iB_iᵀ) + (r/d)·I`.
pub fn build_cca<T: Scalar>(data: &CcaData<T>, p: usize, regularizer: Option<T>) -> Result<Problem<T>> {
    let reg = regularizer.unwrap_or_else(|| default_regularizer(data));
    if !reg.is_finite() || reg < T::zero() {
        return Err(Error::InvalidParameter(format!(
            "regularizer must be finite and >= 0, got {reg}"
        )));
    }
    let na = data.a.rows();
    let n = na + data.b.rows();
    let d = data.agents();
    let ridge = reg / T::of(d as f64);

    let mut components: Vec<Arc<dyn LocalComponent<T>>> = Vec::with_capacity(d);
    let mut sigma_total = Mat::zeros(n, n);
    for i in 0..d {
        let (ai, bi) = data.agent_blocks(i);
        let z = Mat::vcat(&[ai, bi])?;
        let sigma = symmetrize(&z.matmul_tr(&z));
        sigma_total += &sigma;
        components.push(Arc::new(TraceQuadratic::cca(sigma, na, ridge)));
    }
    let problem = Problem::new(p, components)?;
    let aggregate = Arc::new(TraceQuadratic::cca(sigma_total, na, reg));
    Ok(problem.with_aggregate(aggregate))
}

/// Column counts for `d` agents differing by at most one; the first
/// `q mod d` agents take the extra column.
pub fn uniform_partition(q: usize, d: usize) -> Result<Vec<usize>> {
    if d == 0 || q < d {
        return Err(Error::InvalidParameter(format!(
            "cannot split {q} samples across {d} agents"
        )));
    }
    let base = q / d;
    let extra = q % d;
    Ok((0..d).map(|i| base + usize::from(i < extra)).collect())
}

/// `A = U S Vᵀ` with `S(i,i) = ξ^i` (`i = 1..n`) and `U`, `V` orthonormalized
/// from seeded Gaussian draws.
pub fn synth_factor<T: Scalar>(n: usize, q: usize, xi: f64, seed: u64) -> Result<Mat<T>> {
    if n == 0 || q < n {
        return Err(Error::dim("synth_factor", format!("q >= n = {n}"), format!("q = {q}")));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "decay rate must lie in (0, 1), got {xi}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = |rows: usize, cols: usize| {
        Mat::<T>::from_fn(rows, cols, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            T::of(z)
        })
    };
    let left = thin_q(&gaussian(n, n));
    let right = thin_q(&gaussian(q, n));
    let mut us = left;
    for j in 0..n {
        let s = T::of(xi.powi(j as i32 + 1));
        us.col_mut(j).iter_mut().for_each(|v| *v *= s);
    }
    Ok(us.matmul_tr(&right))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_examples() {
        assert_eq!(uniform_partition(3200, 32).unwrap(), vec![100; 32]);
        assert_eq!(uniform_partition(7, 3).unwrap(), vec![3, 2, 2]);
        assert_eq!(uniform_partition(5, 5).unwrap(), vec![1; 5]);
        assert!(uniform_partition(2, 3).is_err());
    }

    #[test]
    fn single_singular_value_factor() {
        let a = synth_factor::<f64>(1, 2, 0.5, 9).unwrap();
        assert_eq!(a.shape(), (1, 2));
        assert!((a.fro_norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn synth_factor_validation() {
        assert!(synth_factor::<f64>(3, 2, 0.5, 0).is_err());
        assert!(synth_factor::<f64>(2, 3, 1.5, 0).is_err());
        assert!(synth_factor::<f64>(2, 3, 0.0, 0).is_err());
    }

    #[test]
    fn cca_data_validation() {
        let a = Mat::<f64>::zeros(2, 4);
        let b = Mat::<f64>::zeros(1, 4);
        assert!(CcaData::new(a.clone(), b.clone(), vec![2, 1]).is_err());
        assert!(CcaData::new(a.clone(), b.clone(), vec![4, 0]).is_err());
        assert!(CcaData::new(a.clone(), Mat::zeros(1, 3), vec![4]).is_err());
        assert!(CcaData::new(a, b, vec![1, 3]).is_ok());
    }

    #[test]
    fn block_product_matches_dense() {
        let m = Mat::<f64>::from_rows(&[[2.0, 1.0, 0.0], [1.0, 3.0, 0.0], [0.0, 0.0, 5.0]]);
        let comp = TraceQuadratic::block_diagonal(Mat::identity(3), m.clone(), 2);
        let x = Mat::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        assert_eq!(comp.constraint_product(&x), m.matmul(&x));
    }

    #[test]
    fn singular_data_needs_a_ridge() {
        // B has a zero row: M is singular without regularization.
        let a = Mat::<f64>::from_rows(&[[1.0, 0.0, 2.0]]);
        let b = Mat::<f64>::from_rows(&[[0.0, 0.0, 0.0]]);
        let data = CcaData::new(a, b, vec![3]).unwrap();
        assert!(matches!(
            build_cca(&data, 1, Some(0.0)),
            Err(Error::ConstraintNotSpd { .. })
        ));
        assert!(build_cca(&data, 1, Some(1e-3)).is_ok());
    }
}
