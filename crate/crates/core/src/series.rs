// SPDX-License-Identifier: MIT OR Apache-2.0

//! Calendar-aligned daily series.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use chrono::{Days, NaiveDate};
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// A real-valued series with one value per consecutive calendar day.
///
/// Index `i` corresponds to `start + i` days; gaps cannot be represented.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    start: NaiveDate,
    values: Vec<f64>,
}

impl DailySeries {
    pub fn new(start: NaiveDate, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(Self { start, values })
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    /// Last covered date.
    pub fn end(&self) -> NaiveDate {
        self.date_at(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start + Days::new(index as u64)
    }

    /// Index of `date`, or `None` outside the span.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let offset = (date - self.start).num_days();
        (offset >= 0 && (offset as usize) < self.values.len()).then_some(offset as usize)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.values.len()).map(|i| self.date_at(i))
    }

    /// Sub-series for the inclusive date range `[from, to]`.
    pub fn window(&self, from: NaiveDate, to: NaiveDate) -> Result<Self> {
        let lo = self.index_of(from).ok_or_else(|| {
            Error::Range(format!("{from} outside {}..{}", self.start, self.end()))
        })?;
        let hi = self
            .index_of(to)
            .ok_or_else(|| Error::Range(format!("{to} outside {}..{}", self.start, self.end())))?;
        if hi < lo {
            return Err(Error::Range(format!("window {from}..{to} is reversed")));
        }
        Self::new(from, self.values[lo..=hi].to_vec())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            start: self.start,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Ordered period boundaries; each boundary date opens a new period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSpec {
    boundaries: Vec<NaiveDate>,
    labels: Vec<String>,
}

impl PeriodSpec {
    /// Labels default to `period1`, `period2`, ... when `labels` is empty.
    pub fn new(boundaries: Vec<NaiveDate>, labels: Vec<String>) -> Result<Self> {
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param(
                "period boundaries must be strictly increasing",
            ));
        }
        let labels = if labels.is_empty() {
            (1..=boundaries.len() + 1)
                .map(|i| format!("period{i}"))
                .collect()
        } else {
            labels
        };
        if labels.len() != boundaries.len() + 1 {
            return Err(Error::param(format!(
                "{} boundaries need {} labels, got {}",
                boundaries.len(),
                boundaries.len() + 1,
                labels.len()
            )));
        }
        Ok(Self { boundaries, labels })
    }

    pub fn boundaries(&self) -> &[NaiveDate] {
        &self.boundaries
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Trailing moving average with a shortened warm-up window.
///
/// Output `i` is the mean of inputs `max(0, i + 1 - window)..=i`, so the
/// result keeps the input's length and start date.
pub fn moving_average(s: &DailySeries, window: usize) -> Result<DailySeries> {
    if window == 0 || window > s.len() {
        return Err(Error::param(format!(
            "window must lie in 1..={}, got {window}",
            s.len()
        )));
    }
    let v = s.values();
    let values = (0..v.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            let anchor = v[i];
            let k = (i + 1 - lo) as f64;
            // Anchored at the current value so a constant run averages to itself exactly.
            anchor + v[lo..=i].iter().map(|&x| x - anchor).sum::<f64>() / k
        })
        .collect();
    DailySeries::new(s.start(), values)
}

/// Splits `s` at the period boundaries. A boundary date belongs to the later period.
pub fn slice_periods(s: &DailySeries, spec: &PeriodSpec) -> Result<Vec<DailySeries>> {
    let mut cuts = vec![0usize];
    for &b in spec.boundaries() {
        match s.index_of(b) {
            Some(i) if i > 0 => cuts.push(i),
            _ => {
                return Err(Error::Range(format!(
                    "boundary {b} must fall after {} and no later than {}",
                    s.start(),
                    s.end()
                )))
            }
        }
    }
    cuts.push(s.len());
    cuts.windows(2)
        .map(|w| DailySeries::new(s.date_at(w[0]), s.values()[w[0]..w[1]].to_vec()))
        .collect()
}

/// Sample summary; `sd` uses the `n - 1` divisor and is absent for a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub median: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (n > 1).then(|| {
        let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    Ok(Summary {
        n,
        mean,
        sd,
        median: median(values),
    })
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
