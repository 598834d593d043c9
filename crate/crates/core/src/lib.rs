// SPDX-License-Identifier: MIT OR Apache-2.0

//! Allocation-only numerical core for regime analysis of daily count series.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every algorithm the
//! command-line companion orchestrates:
//!
//! - [`series`]: calendar-aligned daily series, trailing moving averages,
//!   period slicing and summary statistics.
//! - [`changepoint`]: normal-likelihood segment costs, the AIC/BIC/SIC/MBIC
//!   penalty family, binary segmentation, PELT and a brute-force oracle.
//! - [`regression`]: step-dummy regime designs, OLS, regression with ARMA
//!   errors fitted by conditional sum of squares, AICc order selection and
//!   forecast metrics.
//! - [`hypothesis`]: pooled/Welch two-sample t-tests, Bonferroni correction
//!   and one-way ANOVA with incomplete-beta p-values.
//! - [`synth`]: seeded generators for regime series, the regression DGP and
//!   INAR(1) counts via binomial thinning.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod changepoint;
mod error;
pub mod hypothesis;
pub mod regression;
pub mod series;
pub mod synth;

pub use error::{Error, Result};
pub use series::{DailySeries, PeriodSpec, Summary};
