use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op} needs at least {need} entries, slice has {len}")]
    InsufficientSupport { op: &'static str, len: usize, need: usize },

    #[error("non-finite lattice value at index {index}")]
    NonFinite { index: i64 },

    #[error("lambda grid is empty")]
    EmptyGrid,

    #[error("lambda grid contains 0; the removable singularity must be excluded")]
    GridContainsZero,

    #[error("window edge carries relative mass {ratio:e} (> {tol:e}); inconclusive, enlarge the window")]
    EdgeMass { ratio: f64, tol: f64 },

    #[error(
        "quadrature on [{a}, {b}] did not converge: estimate {value}, error {error:e} after {intervals} intervals"
    )]
    Quadrature {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
        intervals: usize,
    },

    #[error("lattice truncation half-width {got} too small; need at least {required}")]
    WindowTooSmall { got: i64, required: i64 },

    #[error("invalid initial condition: {0}")]
    InvalidSpec(String),

    #[error("solver {solver} is not applicable: {reason}")]
    NotApplicable { solver: String, reason: String },

    #[error("offset constant varies across probes by {spread:e} (> {tol:e}); inconclusive")]
    InconsistentLimit { spread: f64, tol: f64 },

    #[error("{what}: mismatch {diff:e} exceeds {tol:e}")]
    Consistency { what: &'static str, diff: f64, tol: f64 },

    #[error("grid point gamma={gamma} violates regime {regime}")]
    RegimeViolation { regime: String, gamma: f64 },

    #[error("truncation K={k} too small for t={t}: J_2K(t) is not negligible")]
    TruncationGuard { k: usize, t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
