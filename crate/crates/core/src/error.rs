use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("numerical breakdown in simplex: {0}")]
    NumericalBreakdown(String),

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("target is outside the convex hull (residual {residual:e})")]
    InfeasibleTarget { residual: f64 },

    #[error("invalid point set: {0}")]
    InvalidPointSet(String),

    #[error("degenerate hull: {0}")]
    DegenerateHull(String),

    #[error("point is not strictly interior (slack {slack:e})")]
    Boundary { slack: f64 },

    #[error("barrier hessian is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("signal {signal} has zero marginal probability")]
    ZeroMarginal { signal: usize },

    #[error("no persuasive scheme survives on grid step {0}")]
    EmptyRetention(f64),

    #[error("newton solve did not converge after {iterations} iterations (residual {residual:e}); step size too large?")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("quadrature weights underflowed")]
    QuadratureDegenerate,

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid MPP specification: {0}")]
    InvalidMpp(String),

    #[error("invalid configuration at `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("replication {replication}: {source}")]
    Run {
        replication: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("task {task}: {source}")]
    Task {
        task: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("task {task}, episode {episode}: {source}")]
    Episode {
        task: usize,
        episode: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the user's configuration rather than by a run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::InvalidGame(_) | Error::InvalidMpp(_) | Error::Json(_)
        )
    }
}
