use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    Dimension {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not symmetric (residual {residual:e} exceeds {tolerance:e})")]
    Asymmetric { residual: f64, tolerance: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:e}, threshold {threshold:e})")]
    NotPositiveDefinite { min_eig: f64, threshold: f64 },

    #[error("XᵀMX is singular; cannot project onto the generalized Stiefel manifold")]
    RankDeficient,

    #[error("symmetric eigensolver did not converge")]
    NoConvergence,

    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("graph is not connected")]
    Disconnected,

    #[error("no connected Erdős–Rényi draw after {attempts} attempts (d = {d}, p_edge = {p_edge})")]
    GenerationFailed { d: usize, p_edge: f64, attempts: usize },

    #[error("invalid mixing matrix: {0}")]
    Mixing(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("aggregate constraint matrix M is not positive definite (smallest eigenvalue {min_eig:e}); increase the regularizer")]
    ConstraintNotSpd { min_eig: f64 },

    #[error("csv: empty input")]
    EmptyCsv,

    #[error("csv: row {row} has {found} columns, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("csv: cannot parse {cell:?} at row {row}, column {col}")]
    UnparseableCell { row: usize, col: usize, cell: String },

    #[error("csv: non-finite value {cell:?} at row {row}, column {col}")]
    NonFiniteCell { row: usize, col: usize, cell: String },

    #[error("iteration diverged at k = {iteration} (non-finite iterate; try a smaller stepsize)")]
    Diverged { iteration: usize },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(op: &'static str, expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::Dimension {
            op,
            expected: expected.into(),
            found: found.into(),
        }
    }
}
