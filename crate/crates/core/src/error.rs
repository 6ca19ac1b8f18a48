use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("surface type ({genus},{punctures}) does not have negative Euler characteristic")]
    NotHyperbolic { genus: u32, punctures: u32 },

    #[error("unsupported surface type ({genus},{punctures}): {reason}")]
    UnsupportedSurface {
        genus: u32,
        punctures: u32,
        reason: String,
    },

    #[error("inconsistent gluing: {0}")]
    InconsistentGluing(String),

    #[error("nonpositive length {value} on curve {index}")]
    NonpositiveLength { index: usize, value: f64 },

    #[error("non-finite coordinate {value} ({what} {index})")]
    NonFinite {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("trace invariant violated for {what}: residual {residual:e}")]
    TraceInvariant { what: String, residual: f64 },

    #[error("class {class} is not hyperbolic (|trace| = {trace})")]
    NonHyperbolic { class: String, trace: f64 },

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("short-geodesic enumeration did not converge: {0}")]
    EnumerationNotConverged(String),

    #[error("chart violation: non-pants curve {class} of length {length} entered the short set")]
    ChartViolation { class: String, length: f64 },

    #[error("Gram matrix is singular (pivot {pivot:e})")]
    SingularGram { pivot: f64 },

    #[error("Gram matrix is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("linear solve residual {residual:e} exceeds tolerance")]
    SolveResidual { residual: f64 },

    #[error("finite-difference step {0:e} underflows the chart domain")]
    StepUnderflow(f64),

    #[error("integrator step size underflow at t = {t} (h = {h:e})")]
    IntegratorUnderflow { t: f64, h: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Short machine-readable tag used in structured error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotHyperbolic { .. } => "not_hyperbolic",
            Error::UnsupportedSurface { .. } => "unsupported_surface",
            Error::InconsistentGluing(_) => "inconsistent_gluing",
            Error::NonpositiveLength { .. } => "nonpositive_length",
            Error::NonFinite { .. } => "non_finite",
            Error::ChartMismatch(_) => "chart_mismatch",
            Error::TraceInvariant { .. } => "trace_invariant",
            Error::NonHyperbolic { .. } => "non_hyperbolic",
            Error::InvalidWord(_) => "invalid_word",
            Error::EnumerationNotConverged(_) => "enumeration_not_converged",
            Error::ChartViolation { .. } => "chart_violation",
            Error::SingularGram { .. } => "singular_gram",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::SolveResidual { .. } => "solve_residual",
            Error::StepUnderflow(_) => "step_underflow",
            Error::IntegratorUnderflow { .. } => "integrator_underflow",
            Error::TooManySteps(_) => "too_many_steps",
            Error::InvalidParameter(_) => "invalid_parameter",
        }
    }

    /// True for errors caused by malformed input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotHyperbolic { .. }
                | Error::UnsupportedSurface { .. }
                | Error::InconsistentGluing(_)
                | Error::NonpositiveLength { .. }
                | Error::NonFinite { .. }
                | Error::ChartMismatch(_)
                | Error::InvalidWord(_)
                | Error::InvalidParameter(_)
        )
    }
}
