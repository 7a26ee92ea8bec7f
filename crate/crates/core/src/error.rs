use thiserror::Error;

/// Errors produced by the moment engines, solvers and verification suites.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("weights {a} and {b} are numerically coincident (relative gap {gap:.3e}); merge or perturb them")]
    NearCoincident { a: f64, b: f64, gap: f64 },

    #[error("engine {engine} is unavailable: {reason}")]
    EngineUnavailable { engine: &'static str, reason: String },

    #[error("quadrature did not converge: best estimate {value} with achieved error {error:.3e}")]
    NonConvergence { value: f64, error: f64 },

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
