// SPDX-License-Identifier: MIT OR Apache-2.0

//! Offline multiple-changepoint detection under a normal likelihood.
//!
//! All solvers minimise the same penalised objective
//!
//! ```text
//! sum_j C'(segment_j) + k * beta
//! ```
//!
//! where `C` is twice the negative maximised log-likelihood of a segment and
//! `C' = C + ln(n_seg)` under the MBIC penalty (`C' = C` otherwise).
//! Changepoints are reported as 0-based indices of the *last* observation of
//! each segment except the final one.

mod binseg;
mod cost;
mod oracle;
mod pelt;

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

pub use cost::{segment_cost, SegmentCost, VARIANCE_FLOOR};

use crate::{Error, Result};

/// Which normal parameter is allowed to change between segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostModel {
    /// Mean shifts with unit variance; cost is the residual sum of squares.
    Mean,
    /// Variance shifts about a fixed centre (the series mean by default).
    Variance,
    /// Joint mean and variance shifts.
    MeanVar,
}

impl CostModel {
    /// Number of parameters that change at each changepoint.
    pub fn diffparam(self) -> usize {
        match self {
            CostModel::Mean | CostModel::Variance => 1,
            CostModel::MeanVar => 2,
        }
    }

    pub fn min_segment_len(self) -> usize {
        match self {
            CostModel::Mean => 1,
            CostModel::Variance | CostModel::MeanVar => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CostModel::Mean => "mean",
            CostModel::Variance => "variance",
            CostModel::MeanVar => "meanvar",
        }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Centre used by [`CostModel::Variance`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum VarianceCentre {
    /// Deviations about the full-series mean.
    #[default]
    Global,
    /// Deviations about each segment's own mean.
    Segment,
}

/// Per-changepoint penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltySpec {
    Aic,
    Bic,
    Sic,
    Mbic,
    Manual(f64),
}

impl PenaltySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PenaltySpec::Aic => "aic",
            PenaltySpec::Bic => "bic",
            PenaltySpec::Sic => "sic",
            PenaltySpec::Mbic => "mbic",
            PenaltySpec::Manual(_) => "manual",
        }
    }

    /// Whether segment costs carry the `ln(n_seg)` augmentation.
    pub fn augments_cost(&self) -> bool {
        matches!(self, PenaltySpec::Mbic)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PenaltySpec::Manual(v) if v.is_nan() || v < 0.0 => Err(Error::param(format!(
                "manual penalty must be a non-negative number, got {v}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Penalty per changepoint, `beta`.
///
/// With `p = model.diffparam()`: AIC is `2(p + 1)`, BIC and SIC are
/// `(p + 1) ln n`, MBIC is `(p + 2) ln n`. The extra parameter counts the
/// changepoint location itself.
pub fn penalty_value(spec: &PenaltySpec, n: usize, model: CostModel) -> Result<f64> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::param(format!("penalty needs n >= 2, got {n}")));
    }
    let p = model.diffparam() as f64;
    let ln_n = (n as f64).ln();
    Ok(match *spec {
        PenaltySpec::Aic => 2.0 * (p + 1.0),
        PenaltySpec::Bic | PenaltySpec::Sic => (p + 1.0) * ln_n,
        PenaltySpec::Mbic => (p + 2.0) * ln_n,
        PenaltySpec::Manual(v) => v,
    })
}

/// Statistics of one fitted segment. `variance` is the maximum-likelihood
/// (divisor `n`) variance about the segment mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentStats {
    pub start: usize,
    pub len: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Result of a changepoint search.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub changepoints: Vec<usize>,
    pub segments: Vec<SegmentStats>,
    /// Total penalised cost `sum C' + k * beta`.
    pub objective: f64,
    /// Penalty per changepoint that was applied.
    pub penalty: f64,
    /// Some segment hit the variance floor.
    pub degenerate: bool,
}

impl Segmentation {
    pub fn len(&self) -> usize {
        self.changepoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.changepoints.is_empty()
    }

    /// Segment label (0-based) for every observation.
    pub fn labels(&self) -> Vec<usize> {
        self.segments
            .iter()
            .enumerate()
            .flat_map(|(j, s)| core::iter::repeat(j).take(s.len))
            .collect()
    }
}

/// Changepoint search configuration shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detector {
    pub model: CostModel,
    pub penalty: PenaltySpec,
    pub variance_centre: VarianceCentre,
}

impl Detector {
    pub fn new(model: CostModel, penalty: PenaltySpec) -> Self {
        Self {
            model,
            penalty,
            variance_centre: VarianceCentre::Global,
        }
    }

    pub fn with_variance_centre(mut self, centre: VarianceCentre) -> Self {
        self.variance_centre = centre;
        self
    }

    fn prepare(&self, data: &[f64]) -> Result<(SegmentCost, f64)> {
        let min = self.model.min_segment_len();
        if data.len() < 2 * min {
            return Err(Error::SegmentLength {
                len: data.len(),
                min: 2 * min,
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("series contains non-finite values"));
        }
        let beta = penalty_value(&self.penalty, data.len(), self.model)?;
        let cost = SegmentCost::new(
            data,
            self.model,
            self.variance_centre,
            self.penalty.augments_cost(),
        );
        Ok((cost, beta))
    }

    /// Greedy binary segmentation with at most `q_max` changepoints.
    pub fn binseg(&self, data: &[f64], q_max: usize) -> Result<Segmentation> {
        if q_max < 1 {
            return Err(Error::param("q_max must be at least 1"));
        }
        let (cost, beta) = self.prepare(data)?;
        let cps = binseg::search(&cost, beta, q_max);
        Ok(cost.segmentation(&cps, beta))
    }

    /// Exact penalised segmentation by pruned dynamic programming.
    pub fn pelt(&self, data: &[f64]) -> Result<Segmentation> {
        let (cost, beta) = self.prepare(data)?;
        let cps = pelt::search(&cost, beta);
        Ok(cost.segmentation(&cps, beta))
    }

    /// Brute-force optimum over all segmentations with at most `max_k`
    /// changepoints. Limited to series of length [`oracle::MAX_LEN`].
    pub fn exact(&self, data: &[f64], max_k: usize) -> Result<Segmentation> {
        if data.len() > oracle::MAX_LEN {
            return Err(Error::TooLarge {
                len: data.len(),
                max: oracle::MAX_LEN,
            });
        }
        let (cost, beta) = self.prepare(data)?;
        let cps = oracle::search(&cost, beta, max_k)?;
        Ok(cost.segmentation(&cps, beta))
    }
}

pub use oracle::MAX_LEN as ORACLE_MAX_LEN;

pub fn binseg(
    data: &[f64],
    model: CostModel,
    penalty: PenaltySpec,
    q_max: usize,
) -> Result<Segmentation> {
    Detector::new(model, penalty).binseg(data, q_max)
}

pub fn pelt(data: &[f64], model: CostModel, penalty: PenaltySpec) -> Result<Segmentation> {
    Detector::new(model, penalty).pelt(data)
}

pub fn exact_oracle(
    data: &[f64],
    model: CostModel,
    penalty: PenaltySpec,
    max_k: usize,
) -> Result<Segmentation> {
    Detector::new(model, penalty).exact(data, max_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn penalty_constants() {
        let bic = penalty_value(&PenaltySpec::Bic, 100, CostModel::MeanVar).unwrap();
        assert!((bic - 13.815510557964274).abs() < 1e-12);
        let mbic = penalty_value(&PenaltySpec::Mbic, 267, CostModel::Variance).unwrap();
        assert!((mbic - 3.0 * 267f64.ln()).abs() < 1e-12);
        assert!((mbic - 16.763).abs() < 2e-3);
        assert_eq!(
            penalty_value(&PenaltySpec::Manual(0.0), 10, CostModel::Mean).unwrap(),
            0.0
        );
        assert_eq!(
            penalty_value(&PenaltySpec::Aic, 10, CostModel::MeanVar).unwrap(),
            6.0
        );
        assert_eq!(
            penalty_value(&PenaltySpec::Sic, 50, CostModel::Mean).unwrap(),
            penalty_value(&PenaltySpec::Bic, 50, CostModel::Mean).unwrap()
        );
        assert!(penalty_value(&PenaltySpec::Manual(-1.0), 10, CostModel::Mean).is_err());
        assert!(penalty_value(&PenaltySpec::Bic, 1, CostModel::Mean).is_err());
    }

    #[test]
    fn diffparam_per_model() {
        assert_eq!(CostModel::Mean.diffparam(), 1);
        assert_eq!(CostModel::Variance.diffparam(), 1);
        assert_eq!(CostModel::MeanVar.diffparam(), 2);
    }

    #[test]
    fn too_short_series_rejected() {
        let err = pelt(&[1.0, 2.0, 3.0], CostModel::MeanVar, PenaltySpec::Bic).unwrap_err();
        assert_eq!(err, Error::SegmentLength { len: 3, min: 4 });
        assert!(binseg(&[1.0, 2.0, 3.0, 4.0], CostModel::Mean, PenaltySpec::Bic, 0).is_err());
    }

    #[test]
    fn oracle_size_limit() {
        let data = vec![0.0; 41];
        assert!(matches!(
            exact_oracle(&data, CostModel::Mean, PenaltySpec::Bic, 2),
            Err(Error::TooLarge { len: 41, max: 40 })
        ));
    }

    #[test]
    fn labels_cover_series() {
        let data = [0.0, 0.0, 10.0, 10.0];
        let seg = exact_oracle(&data, CostModel::Mean, PenaltySpec::Manual(1.0), 3).unwrap();
        assert_eq!(seg.changepoints, [1]);
        assert_eq!(seg.labels(), [0, 0, 1, 1]);
    }
}
