use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Variants fall into three groups, matching the experiment runner's exit
/// codes: contract/precondition failures (the input does not satisfy the
/// hypotheses of the statement being checked), numerical failures (the input
/// is admissible but a solver or stencil could not deliver a trustworthy
/// value), and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("curvature profile not evaluable at t = {t}: {reason}")]
    ProfileDomain { t: f64, reason: String },

    #[error("curvature profile is not even: {0}")]
    Evenness(String),

    #[error("step {step} too coarse to resolve the first zero near t = {t}")]
    Resolution { step: f64, t: f64 },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("sample grids are not aligned: {0}")]
    Alignment(String),

    #[error("singular seeding failed: {0}")]
    Seeding(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("finite-difference stencil leaves the chart domain at {0}")]
    Stencil(String),

    #[error("degenerate plane: |det Gram| = {0:e}")]
    Degenerate(f64),

    #[error("metric is not Lorentzian at the sampled point: {0}")]
    Model(String),

    #[error("shooting did not converge: residual {residual:e} after {iterations} iterations")]
    Convergence { residual: f64, iterations: usize },

    #[error("conjugate point before the target at t = {0}")]
    ConjugatePoint(f64),

    #[error("hypersurface construction failed at node {node}: {reason}")]
    Construction { node: usize, reason: String },

    #[error("shape operator is not symmetric at node {node} (asymmetry {asymmetry:e})")]
    Frame { node: usize, asymmetry: f64 },

    #[error("Newton trace identity {identity} fails at k = {k}: residual {residual:e}")]
    Algebra { identity: usize, k: usize, residual: f64 },

    #[error("hypotheses not met: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Runner exit code: 2 for rejected inputs, 3 for numerical and I/O
    /// failures. (Exit 1 is reserved for verified violations, which are
    /// reports, not errors.)
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Evenness(_)
            | Error::Domain(_)
            | Error::Alignment(_)
            | Error::Contract(_)
            | Error::Precondition(_)
            | Error::Config(_)
            | Error::Construction { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
