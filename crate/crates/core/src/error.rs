use thiserror::Error;

/// Errors produced by the fitting and distribution routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside its family's domain.
    #[error("{family}: parameter `{field}` = {value} is outside its domain ({reason})")]
    ParamDomain {
        family: &'static str,
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Wrong number of parameters for a family or model.
    #[error("{what}: expected {expected} parameters, got {got}")]
    ParamCount {
        what: String,
        expected: String,
        got: usize,
    },

    /// Argument outside the admissible range (probabilities, grids, flags).
    #[error("domain error: {0}")]
    Domain(String),

    /// Data that cannot support the requested fit.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// An iterative procedure ran out of iterations.
    #[error("{what} did not converge after {iterations} iterations (last iterate {last:?})")]
    NonConvergence {
        what: String,
        iterations: usize,
        last: Vec<f64>,
    },

    /// A matrix that must be inverted is numerically singular.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Unknown method, family or model code.
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    /// Data ingestion failure.
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Input(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Input(e.to_string())
    }
}
