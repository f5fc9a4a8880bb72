//! Distributed problem instances: local objectives `f_i` with private
//! constraint matrices `M_i`, coupled through `Σ_i XᵀM_iX = I`.

mod cca;
mod io;

use std::fmt;
use std::sync::Arc;

pub use cca::{build_cca, default_regularizer, synth_factor, uniform_partition, CcaData, TraceQuadratic};
pub use io::{load_matrix_csv, parse_matrix_csv, write_matrix_csv};

use crate::error::{Error, Result};
use crate::numerics::{asymmetry, sym_eig, Mat};
use crate::scalar::Scalar;

/// Private payload of one agent.
pub trait LocalComponent<T: Scalar>: Send + Sync {
    fn value(&self, x: &Mat<T>) -> T;

    fn gradient(&self, x: &Mat<T>) -> Mat<T>;

    /// The agent's symmetric share `M_i` of the constraint matrix.
    fn constraint(&self) -> &Mat<T>;

    /// `M_i X`.
    fn constraint_product(&self, x: &Mat<T>) -> Mat<T> {
        self.constraint().matmul(x)
    }

    /// `(∇f_i(X), M_iX)` in one pass; override when the two share work.
    fn gradient_and_product(&self, x: &Mat<T>) -> (Mat<T>, Mat<T>) {
        (self.gradient(x), self.constraint_product(x))
    }
}

type ValueFn<T> = dyn Fn(&Mat<T>) -> T + Send + Sync;
type GradFn<T> = dyn Fn(&Mat<T>) -> Mat<T> + Send + Sync;

/// A local component assembled from closures, for objectives other than CCA.
pub struct FnComponent<T: Scalar> {
    value: Box<ValueFn<T>>,
    gradient: Box<GradFn<T>>,
    constraint: Mat<T>,
}

impl<T: Scalar> FnComponent<T> {
    pub fn new(
        value: impl Fn(&Mat<T>) -> T + Send + Sync + 'static,
        gradient: impl Fn(&Mat<T>) -> Mat<T> + Send + Sync + 'static,
        constraint: Mat<T>,
    ) -> Self {
        FnComponent {
            value: Box::new(value),
            gradient: Box::new(gradient),
            constraint,
        }
    }
}

impl<T: Scalar> LocalComponent<T> for FnComponent<T> {
    fn value(&self, x: &Mat<T>) -> T {
        (self.value)(x)
    }

    fn gradient(&self, x: &Mat<T>) -> Mat<T> {
        (self.gradient)(x)
    }

    fn constraint(&self) -> &Mat<T> {
        &self.constraint
    }
}

/// `min Σ f_i(X)  s.t.  Σ XᵀM_iX = I_p` over `X ∈ R^{n×p}`.
#[derive(Clone)]
pub struct Problem<T: Scalar> {
    n: usize,
    p: usize,
    components: Vec<Arc<dyn LocalComponent<T>>>,
    m_total: Mat<T>,
    /// Optional aggregated objective used only for diagnostics (same values as
    /// the sum of the local ones, cheaper to evaluate).
    aggregate: Option<Arc<dyn LocalComponent<T>>>,
}

impl<T: Scalar> fmt::Debug for Problem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("n", &self.n)
            .field("p", &self.p)
            .field("d", &self.components.len())
            .finish()
    }
}

const CONSTRAINT_SYMMETRY_TOL: f64 = 1e-12;

impl<T: Scalar> Problem<T> {
    /// Validates shapes and symmetry of every `M_i` and positive definiteness
    /// of `M = Σ M_i`.
    pub fn new(p: usize, components: Vec<Arc<dyn LocalComponent<T>>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("a problem needs at least one agent".into()))?;
        let n = first.constraint().rows();
        if p == 0 || p > n {
            return Err(Error::InvalidParameter(format!("need 1 <= p <= n = {n}, got p = {p}")));
        }
        let mut m_total = Mat::zeros(n, n);
        for (i, c) in components.iter().enumerate() {
            let mi = c.constraint();
            if mi.shape() != (n, n) {
                return Err(Error::dim(
                    "Problem::new",
                    format!("{n}x{n} constraint for agent {i}"),
                    format!("{}x{}", mi.rows(), mi.cols()),
                ));
            }
            let allowed = T::of(CONSTRAINT_SYMMETRY_TOL) * mi.fro_norm();
            let residual = asymmetry(mi);
            if residual > allowed {
                return Err(Error::Asymmetric {
                    residual: residual.as_f64(),
                    tolerance: allowed.as_f64(),
                });
            }
            m_total += mi;
        }
        let eig = sym_eig(&m_total)?;
        let threshold = T::of(crate::numerics::SPD_RELATIVE_TOL) * eig.max().abs();
        if eig.min().is_nan() || eig.min() <= threshold {
            return Err(Error::ConstraintNotSpd {
                min_eig: eig.min().as_f64(),
            });
        }
        Ok(Problem {
            n,
            p,
            components,
            m_total,
            aggregate: None,
        })
    }

    /// Attaches a centralized evaluator whose value and gradient equal the
    /// sums of the local ones. Used for logging the objective only.
    pub fn with_aggregate(mut self, aggregate: Arc<dyn LocalComponent<T>>) -> Self {
        self.aggregate = Some(aggregate);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn agents(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Arc<dyn LocalComponent<T>>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &dyn LocalComponent<T> {
        self.components[i].as_ref()
    }

    /// `M = Σ M_i`.
    pub fn constraint(&self) -> &Mat<T> {
        &self.m_total
    }

    /// `f(X) = Σ f_i(X)`.
    pub fn objective(&self, x: &Mat<T>) -> T {
        match &self.aggregate {
            Some(agg) => agg.value(x),
            None => self.components.iter().map(|c| c.value(x)).sum(),
        }
    }

    /// `∇f(X) = Σ ∇f_i(X)`, summed in agent order.
    pub fn gradient(&self, x: &Mat<T>) -> Mat<T> {
        let mut acc = self.components[0].gradient(x);
        for c in &self.components[1..] {
            acc += &c.gradient(x);
        }
        acc
    }

    /// `MX = Σ M_iX`, summed in agent order.
    pub fn constraint_product(&self, x: &Mat<T>) -> Mat<T> {
        let mut acc = self.components[0].constraint_product(x);
        for c in &self.components[1..] {
            acc += &c.constraint_product(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(m: Mat<f64>) -> Arc<dyn LocalComponent<f64>> {
        Arc::new(FnComponent::new(
            |x: &Mat<f64>| 0.5 * x.fro_norm_sq(),
            |x: &Mat<f64>| x.clone(),
            m,
        ))
    }

    #[test]
    fn rejects_indefinite_total() {
        let comps = vec![quad(Mat::from_diag(&[1.0, 0.0])), quad(Mat::from_diag(&[0.0, 0.0]))];
        assert!(matches!(Problem::new(1, comps), Err(Error::ConstraintNotSpd { .. })));
    }

    #[test]
    fn rejects_asymmetric_share_and_bad_p() {
        let comps = vec![quad(Mat::from_rows(&[[1.0, 0.5], [0.0, 1.0]]))];
        assert!(matches!(Problem::new(1, comps), Err(Error::Asymmetric { .. })));
        assert!(Problem::new(3, vec![quad(Mat::identity(2))]).is_err());
        assert!(Problem::<f64>::new(1, vec![]).is_err());
    }

    #[test]
    fn sums_over_agents() {
        let comps = vec![quad(Mat::from_diag(&[1.0, 0.0])), quad(Mat::from_diag(&[0.0, 2.0]))];
        let prob = Problem::new(1, comps).unwrap();
        assert_eq!(prob.constraint(), &Mat::from_diag(&[1.0, 2.0]));
        let x = Mat::from_rows(&[[1.0], [2.0]]);
        assert_eq!(prob.objective(&x), 5.0);
        assert_eq!(prob.gradient(&x), x.scale(2.0));
        assert_eq!(prob.constraint_product(&x), Mat::from_rows(&[[1.0], [4.0]]));
    }
}
