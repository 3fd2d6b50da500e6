//! Min-plus network calculus for age of information.
//!
//! The crate computes worst-case and statistical age-of-information (AoI) and
//! virtual-delay bounds for periodic and Poisson update sources served by
//! latency-rate, Markov on-off and priority-scheduled systems, and ships a
//! continuous-time trace simulator to check those bounds.
//!
//! Units are kb for data and ms for time throughout (1 Mb/s = 1 kb/ms).

// `!(x > y)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod curves;
pub mod numeric;
pub mod service;
pub mod sim;
pub mod traffic;

/// A model parameter outside its admissible range.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("invalid {name}: {reason}")]
pub struct ParamError {
    pub name: &'static str,
    pub reason: String,
}

impl ParamError {
    pub fn new(name: &'static str, reason: impl Into<String>) -> Self {
        Self { name, reason: reason.into() }
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<(), ParamError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ParamError::new(name, format!("must be positive and finite, got {v}")))
    }
}

pub(crate) fn probability(name: &'static str, v: f64) -> Result<(), ParamError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(ParamError::new(name, format!("must lie in (0, 1), got {v}")))
    }
}
