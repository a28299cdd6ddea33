use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape does not fit on the torus: extent {extent:.4} >= torus side {side:.4}")]
    ShapeTooLarge { extent: f64, side: f64 },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max |A - A*| = {0:e})")]
    NotHermitian(f64),

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("invalid mixture weights: {0}")]
    BadWeights(String),

    #[error("smoother must be nonnegative with unit mass: {0}")]
    BadSmoother(String),

    #[error("delta must lie in (0, 1), got {0}")]
    BadDelta(f64),

    #[error("domain is empty")]
    EmptyDomain,

    #[error("localization result was built from a different state")]
    MismatchedState,

    #[error("{what}: routes disagree by {deviation:e} (tolerance {tol:e})")]
    ConsistencyFailure {
        what: &'static str,
        deviation: f64,
        tol: f64,
    },

    #[error("shape must be a ball centered at the origin")]
    NotABall,

    #[error("requested {k} window vectors on a lattice of size {n}")]
    TooManyWindows { k: usize, n: usize },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("invalid state spec `{spec}`: {reason}")]
    StateSpec { spec: String, reason: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
