use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular jet: division by a jet whose value is {value:e}")]
    SingularJet { value: f64 },

    #[error("jet order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("insufficient jet order: need {needed}, have {available}")]
    InsufficientOrder { needed: usize, available: usize },

    #[error("jet order {requested} exceeds the supported maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },

    #[error("logarithm or real power of a non-positive value {value:e}")]
    NonPositive { value: f64 },

    #[error("malformed curve spec: {0}")]
    Malformed(String),

    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("local convexity violated at x = {x}: Wronskian {wronskian:e} <= 0")]
    ConvexityViolation { x: f64, wronskian: f64 },

    #[error("power curve exponents must be pairwise distinct, got {0:?}")]
    RepeatedExponents([f64; 3]),

    #[error("degenerate frame at x = {x}: determinant {det:e}")]
    DegenerateFrame { x: f64, det: f64 },

    #[error("small pivot {value:e} at {location}")]
    Pivot { location: String, value: f64 },

    #[error("Wronskian drift {drift:e} exceeds {limit:e}; reduce the step")]
    StepSize { drift: f64, limit: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Malformed(_)
                | Error::Constraint(_)
                | Error::OutOfDomain { .. }
                | Error::RepeatedExponents(_)
                | Error::ConvexityViolation { .. }
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
