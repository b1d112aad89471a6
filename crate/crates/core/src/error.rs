use thiserror::Error;

/// Diagnostic payload attached to a continuation abort: which runtime
/// assertion tripped, the measured value and the bound it violated, and
/// the flow time at which it happened.
#[derive(Debug, Clone, PartialEq)]
pub struct AbortInfo {
    pub assertion: String,
    pub measured: f64,
    pub bound: f64,
    pub t: f64,
}

impl std::fmt::Display for AbortInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} = {:.6e} exceeds {:.6e} at t = {:.6}",
            self.assertion, self.measured, self.bound, self.t
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid hyperbolic point: {0}")]
    InvalidPoint(String),

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("point lies inside the convex core: {0}")]
    InsideCore(String),

    #[error("singular immersion: {0}")]
    SingularImmersion(String),

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("shape operator not symmetric with respect to the metric: {0}")]
    NonSymmetric(String),

    #[error("non-convex seed: {0}")]
    NonConvexSeed(String),

    #[error("parameter out of range: {0}")]
    InvalidParam(String),

    #[error("elliptic solvability lost: {0}")]
    Solvability(String),

    #[error("linear solver failure: {0}")]
    SolverFailure(String),

    #[error("integrand ordering violated: {0}")]
    Ordering(String),

    #[error("continuation aborted: {0}")]
    Abort(AbortInfo),
}

pub type Result<T> = std::result::Result<T, Error>;
