//! Error taxonomy shared by every module.
//!
//! The variants map one-to-one onto the failure classes the library promises
//! to distinguish: malformed inputs, enumeration capacity, the two
//! conditioning failure modes, and strategies stepping outside their
//! constraint. The CLI maps `InvalidInput` to exit code 2 and mathematical
//! check failures to exit code 1.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-domain input (dimension mismatch, bad labels,
    /// parameters outside their stated domain, unparseable files, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exact enumeration would exceed its configured cap.
    #[error("capacity exceeded: {what} needs {needed} but the cap is {cap} (override with CREDAL_LLN_CAP)")]
    Capacity {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    /// Conditioning on an event whose upper probability is zero is undefined
    /// under every supported policy.
    #[error("conditioning undefined: event has upper probability 0")]
    UndefinedConditioning,

    /// The strict-positive-lower policy refuses events whose lower
    /// probability is zero.
    #[error("conditioning policy violated: event has lower probability 0 under the strict-positive-lower policy")]
    PolicyViolation,

    /// A strategy proposed a conditional distribution outside the step
    /// constraint. Never silent: the step and the offending history are named.
    #[error("strategy violation at step {step} (history {history:?}): {reason}")]
    StrategyViolation {
        step: usize,
        history: Vec<f64>,
        reason: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Require a finite float, otherwise report which argument was bad.
pub fn ensure_finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {x}")))
    }
}
