use thiserror::Error;

/// Crate-wide error type.
///
/// Variants split into two families: input/validation problems (bad grids,
/// malformed files, contract violations) and numeric failures (divergence,
/// overflow, ill-conditioning). [`Error::is_validation`] tells the CLI which
/// exit code to use.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid is not symmetric about t = 0")]
    AsymmetricGrid,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("derivative order {0} not supported (analytic forms coded up to 4)")]
    UnsupportedOrder(u32),

    #[error("interpolation nodes spread over diameter {0:.3e} >= 1/2")]
    NodeDiameter(f64),

    #[error("overflow while integrating at lambda = {re}+{im}i")]
    Overflow { re: f64, im: f64 },

    #[error("Newton iteration failed to converge from seed {re}+{im}i")]
    NewtonDivergence { re: f64, im: f64 },

    #[error("contour count inconsistency: expected {expected} zeros, located {located}")]
    ContourInconsistency { expected: usize, located: usize },

    #[error("contour retry limit reached (a zero sits within 1e-8 of every attempted boundary)")]
    ContourRetryLimit,

    #[error("fixed-point sweep diverged; residual history: {history:?}")]
    SweepDivergence { history: Vec<f64> },

    #[error("reconstruction diverged after {iterations} iterations; residuals: {history:?}")]
    Divergence {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("reconstruction did not converge in {iterations} iterations; last residual {residual:.3e}")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("Gram matrix condition number {cond:.3e} exceeds 1e12; retry with regularization ~ {suggested:.3e}")]
    IllConditioned { cond: f64, suggested: f64 },

    #[error("branch detection failed: {0}")]
    BranchDetection(String),

    #[error("asymptotic constants out of range: {0}")]
    OutOfRange(String),

    #[error("index sets do not match: {0}")]
    IndexMismatch(String),

    #[error("near-multiple zero: |eta2'| = {0:.3e} below threshold")]
    NearMultipleZero(f64),
}

impl Error {
    /// True for errors caused by bad input rather than numeric failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::GridMismatch(_)
                | Error::AsymmetricGrid
                | Error::InvalidArgument(_)
                | Error::Parse { .. }
                | Error::Io(_)
                | Error::UnsupportedOrder(_)
                | Error::NodeDiameter(_)
                | Error::IndexMismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
