// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::boxed::Box;
use alloc::string::String;

use crate::regression::RegimeModelFit;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("empty series")]
    EmptySeries,
    #[error("out of range: {0}")]
    Range(String),
    #[error("segment too short: length {len}, minimum {min}")]
    SegmentLength { len: usize, min: usize },
    #[error("series too long for exhaustive search: {len} > {max}")]
    TooLarge { len: usize, max: usize },
    #[error("design error: {0}")]
    Design(String),
    #[error("sample size error: {0}")]
    Size(String),
    #[error("undefined statistic: {0}")]
    Undefined(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no candidate model could be fitted: {0}")]
    NoFit(String),
    /// The optimizer ran out of budget; `best` is the lowest-objective fit seen.
    #[error("no convergence after {evaluations} objective evaluations")]
    Convergence {
        evaluations: usize,
        best: Box<RegimeModelFit>,
    },
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
