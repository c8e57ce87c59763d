use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the numerical
/// pipeline, from construction-time parameter checks to runtime guards.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry encountered: {0}")]
    NonFinite(String),
    #[error("matrix exponential did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("smearing function is not differentiable: {0}")]
    NotDifferentiable(String),
    #[error("smearing function violates boundary conditions: {0}")]
    BoundaryViolation(String),
    #[error("caustic singularity: |sin(omega T)| too small ({0})")]
    CausticSingularity(f64),
    #[error("time step too large: {0}")]
    StepTooLarge(String),
    #[error("k-grid aliasing: {0}")]
    Aliasing(String),
    #[error("propagator family is missing a node: {0}")]
    MissingNode(String),
    #[error("set extends outside the alias-free window: {0}")]
    OutOfWindow(String),
    #[error("pointer support overflows the alias-free window: {0}")]
    WindowOverflow(String),
    #[error("pointer state is not normalized: {0}")]
    NotNormalized(String),
    #[error("mixed states are not supported here: {0}")]
    MixedStateUnsupported(String),
    #[error("smearing is not unit-normalized: {0}")]
    NotNormalizedSmearing(String),
    #[error("degenerate B coefficient: |B_f| = {0}")]
    DegenerateB(f64),
    #[error("pole at k = -1 in the Liouville class operator")]
    PoleAtMinusOne,
    #[error("cost budget exceeded: {0}")]
    CostBudgetExceeded(String),
    #[error("config error: {0}")]
    ConfigError(String),
    #[error("state too close to the grid edge: {0}")]
    EdgeProximity(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
