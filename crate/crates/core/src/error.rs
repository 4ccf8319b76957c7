use thiserror::Error;

use crate::tree::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The population is a.s. infinite at theta = 0, so samplers and
    /// moment formulas involving Z0 are undefined there.
    #[error("{operation} requires theta > 0 (got theta = 0)")]
    ThetaZero { operation: &'static str },

    #[error("quadrature did not converge: estimate {estimate}, error bound {error} > tolerance {tolerance}")]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("invalid ancestral process: {0}")]
    InvalidProcess(#[from] Violation),

    #[error("segment index {index} out of range for a process with {len} atoms")]
    InvalidIndex { index: usize, len: usize },

    #[error("depth {depth} is not inside segment {segment} (length {length})")]
    InvalidTreePoint {
        segment: String,
        depth: f64,
        length: f64,
    },

    #[error("operation requires at least one atom")]
    EmptyProcess,

    /// A sampler reached a state its construction rules out; always a bug.
    #[error("sampler invariant broken at step {step}: {detail}")]
    Invariant { step: usize, detail: String },

    #[error("{0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}
