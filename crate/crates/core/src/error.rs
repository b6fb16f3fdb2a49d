use thiserror::Error;

/// Every failure the workbench can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmibError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("singular inductance block: {determinant} = {value:e}")]
    SingularInductance { determinant: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("design failure: {0}")]
    DesignFailure(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("no equilibrium after {iterations} iterations (residual {residual:e})")]
    NoEquilibrium { iterations: usize, residual: f64 },

    #[error("infeasible anchor: {0}")]
    InfeasibleAnchor(String),

    #[error("final value undefined: {0}")]
    FinalValueUndefined(String),

    #[error("decoupling matrix singular: gamma1 = {gamma:e} at state {state:?}")]
    SingularDecoupling { gamma: f64, state: Vec<f64> },

    #[error("simulation diverged at t = {time}: {reason}")]
    Divergence { time: f64, reason: String },

    #[error("config error at line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SmibError {
    fn from(e: std::io::Error) -> Self {
        SmibError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SmibError>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> SmibError {
    SmibError::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
