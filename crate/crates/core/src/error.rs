use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {x} lies outside the sampled range [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (best estimate {estimate})")]
    Tolerance { estimate: f64, tol: f64 },

    #[error("bracket expansion reached d = {cap:e} at x = {x}: no finite solution detected")]
    NoFiniteRoot { x: f64, cap: f64 },

    #[error("bisection stalled at x = {x}: |F(d)| = {residual:e} exceeds {tol:e}")]
    RootNotConverged { x: f64, residual: f64, tol: f64 },

    #[error("Wronskian drift {drift:e} exceeds tolerance {tol:e}")]
    Conditioning { drift: f64, tol: f64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("no admissible samples")]
    NoAdmissibleSamples,

    #[error("missing derivative track: {0}")]
    MissingTrack(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
