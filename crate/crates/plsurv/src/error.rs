//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped by the
//! kind of failure rather than by module, so callers can match on what went
//! wrong (bad input, bad domain, estimation breakdown) without caring which
//! layer raised it.

use crate::estimation::FitResult;

/// Errors produced by model construction, estimation, and simulation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constructor or operation argument failed validation. `field` names
    /// the offending argument.
    #[error("invalid `{field}`: {message}")]
    InvalidParameter {
        field: &'static str,
        message: String,
    },

    /// A mathematically valid model was asked to evaluate outside its
    /// support or with an out-of-range probability.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested moment does not exist for the given tail exponent.
    #[error("moment of order {order} diverges: requires order < {limit} (tail exponent minus one)")]
    DivergentMoment { order: u32, limit: f64 },

    /// Input data was empty where at least one observation is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// An estimator's formula degenerates on this data (for example a
    /// segment with no events, or all observations sitting on a boundary).
    #[error("degenerate estimate: {0}")]
    Degenerate(String),

    /// The numerical maximizer ran out of iterations. The best iterate
    /// found so far is carried along so callers can inspect it.
    #[error("no convergence after {iterations} iterations (projected gradient norm {grad_norm:.3e})")]
    NoConvergence {
        iterations: usize,
        grad_norm: f64,
        best: Box<FitResult>,
    },

    /// A grid search had no admissible candidate to evaluate.
    #[error("change-point search failed: {0}")]
    Search(String),

    /// Root finding for the censoring calibration could not bracket or
    /// reach the target.
    #[error("censoring calibration failed: {0}")]
    Calibration(String),

    /// A simulation study could not produce a report.
    #[error("simulation study failed: {0}")]
    Study(String),

    /// A statistical test is undefined on this data.
    #[error("degenerate test: {0}")]
    DegenerateTest(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
