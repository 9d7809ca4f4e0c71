use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = GcqError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GcqError {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid construction parameter (mesh size, grading exponent, indices...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid time mesh: {0}")]
    Mesh(String),

    #[error("contour construction failed: {0}")]
    Contour(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("symbol evaluation failed at s = {s}: {message}")]
    Evaluation { s: Complex64, message: String },

    #[error("step {step}: contour node {node} is numerically on a stepper pole")]
    NearPole { step: usize, node: usize },

    #[error("singular solve at step {step}: symbol vanishes at the real pole {pole}")]
    SingularSolve { step: usize, pole: f64 },

    #[error("degenerate point set: {0}")]
    DegeneratePoints(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl GcqError {
    pub(crate) fn evaluation(s: Complex64, message: impl Into<String>) -> Self {
        GcqError::Evaluation {
            s,
            message: message.into(),
        }
    }

    /// True for failures of the numerical pipeline (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GcqError::Evaluation { .. }
                | GcqError::NearPole { .. }
                | GcqError::SingularSolve { .. }
                | GcqError::DegeneratePoints(_)
                | GcqError::Validation(_)
                | GcqError::Contour(_)
        )
    }

    pub fn is_io(&self) -> bool {
        match self {
            GcqError::Io(_) => true,
            GcqError::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}
