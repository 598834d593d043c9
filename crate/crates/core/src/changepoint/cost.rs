// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::{CostModel, SegmentStats, Segmentation, VarianceCentre};
use crate::{Error, Result};

/// Lower bound on a segment's variance estimate.
pub const VARIANCE_FLOOR: f64 = 1e-8;

/// `n (ln 2 pi + ln v + s2 / v)` with `v = max(s2, floor)`: the Gaussian
/// negative log-likelihood maximised over variances no smaller than the floor.
/// Equals `n (ln 2 pi + ln s2 + 1)` whenever `s2` is above the floor.
fn gaussian_cost(n: f64, s2: f64) -> f64 {
    let v = s2.max(VARIANCE_FLOOR);
    n * ((2.0 * PI).ln() + v.ln() + s2 / v)
}

/// Twice the negative maximised log-likelihood of `data[lo..=hi]`, computed
/// directly from the observations.
///
/// `global_mean` is the centre used by the variance model.
pub fn segment_cost(
    data: &[f64],
    lo: usize,
    hi: usize,
    model: CostModel,
    global_mean: f64,
) -> Result<f64> {
    if lo > hi || hi >= data.len() {
        return Err(Error::Range(alloc::format!(
            "segment {lo}..={hi} outside series of length {}",
            data.len()
        )));
    }
    let seg = &data[lo..=hi];
    let n = seg.len();
    if n < model.min_segment_len() {
        return Err(Error::SegmentLength {
            len: n,
            min: model.min_segment_len(),
        });
    }
    let nf = n as f64;
    let mean = seg.iter().sum::<f64>() / nf;
    let rss: f64 = seg.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok(match model {
        CostModel::Mean => rss,
        CostModel::MeanVar => gaussian_cost(nf, rss / nf),
        CostModel::Variance => {
            let ss: f64 = seg
                .iter()
                .map(|x| (x - global_mean) * (x - global_mean))
                .sum();
            gaussian_cost(nf, ss / nf)
        }
    })
}

/// Prefix-sum segment cost evaluator shared by every solver.
///
/// Segments are half-open index ranges `[a, b)`.
#[derive(Debug, Clone)]
pub struct SegmentCost {
    data: Vec<f64>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    model: CostModel,
    centre: VarianceCentre,
    augment: bool,
}

impl SegmentCost {
    pub fn new(data: &[f64], model: CostModel, centre: VarianceCentre, augment: bool) -> Self {
        let n = data.len();
        let mean = data.iter().sum::<f64>() / n.max(1) as f64;
        let mut sum = Vec::with_capacity(n + 1);
        let mut sum_sq = Vec::with_capacity(n + 1);
        sum.push(0.0);
        sum_sq.push(0.0);
        let (mut s1, mut s2) = (0.0, 0.0);
        for &x in data {
            let z = x - mean;
            s1 += z;
            s2 += z * z;
            sum.push(s1);
            sum_sq.push(s2);
        }
        Self {
            data: data.to_vec(),
            sum,
            sum_sq,
            model,
            centre,
            augment,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn augments(&self) -> bool {
        self.augment
    }

    pub fn min_len(&self) -> usize {
        self.model.min_segment_len()
    }

    /// Variance estimate that enters the likelihood of `[a, b)`.
    fn variance_estimate(&self, a: usize, b: usize) -> f64 {
        let n = (b - a) as f64;
        let s1 = self.sum[b] - self.sum[a];
        let s2 = self.sum_sq[b] - self.sum_sq[a];
        match (self.model, self.centre) {
            (CostModel::Variance, VarianceCentre::Global) => s2 / n,
            _ => (s2 - s1 * s1 / n).max(0.0) / n,
        }
    }

    /// Cost `C'` of `[a, b)`, including the MBIC length term when enabled.
    pub fn cost(&self, a: usize, b: usize) -> f64 {
        let n = (b - a) as f64;
        let base = match self.model {
            CostModel::Mean => {
                let s1 = self.sum[b] - self.sum[a];
                let s2 = self.sum_sq[b] - self.sum_sq[a];
                (s2 - s1 * s1 / n).max(0.0)
            }
            CostModel::Variance | CostModel::MeanVar => {
                gaussian_cost(n, self.variance_estimate(a, b))
            }
        };
        if self.augment {
            base + n.ln()
        } else {
            base
        }
    }

    pub fn is_degenerate(&self, a: usize, b: usize) -> bool {
        self.model != CostModel::Mean && self.variance_estimate(a, b) < VARIANCE_FLOOR
    }

    /// Segment boundaries `[0, c1 + 1, ..., n]` for changepoints `c`.
    pub(crate) fn bounds(&self, changepoints: &[usize]) -> Vec<usize> {
        let mut b = Vec::with_capacity(changepoints.len() + 2);
        b.push(0);
        b.extend(changepoints.iter().map(|&c| c + 1));
        b.push(self.len());
        b
    }

    /// Penalised objective of a candidate changepoint set.
    pub fn objective(&self, changepoints: &[usize], beta: f64) -> f64 {
        let b = self.bounds(changepoints);
        let total: f64 = b.windows(2).map(|w| self.cost(w[0], w[1])).sum();
        if changepoints.is_empty() {
            total
        } else {
            total + changepoints.len() as f64 * beta
        }
    }

    pub fn segmentation(&self, changepoints: &[usize], beta: f64) -> Segmentation {
        let b = self.bounds(changepoints);
        let segments = b
            .windows(2)
            .map(|w| {
                let seg = &self.data[w[0]..w[1]];
                let n = seg.len() as f64;
                let mean = seg.iter().sum::<f64>() / n;
                let variance = seg.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                SegmentStats {
                    start: w[0],
                    len: seg.len(),
                    mean,
                    variance,
                }
            })
            .collect();
        Segmentation {
            changepoints: changepoints.to_vec(),
            segments,
            objective: self.objective(changepoints, beta),
            penalty: beta,
            degenerate: b.windows(2).any(|w| self.is_degenerate(w[0], w[1])),
        }
    }
}
