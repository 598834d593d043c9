// SPDX-License-Identifier: MIT OR Apache-2.0

//! File formats: series CSV/JSON, segmentation and model reports,
//! per-day label and prediction CSVs.

use std::path::Path;

use chrono::NaiveDate;
use regimecast_core::changepoint::Segmentation;
use regimecast_core::regression::{FitMetrics, GridCell, RegimeModelFit};
use regimecast_core::DailySeries;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::StageConfig;
use crate::error::{Error, Result};
use crate::ingest::parse_dated;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub start_date: NaiveDate,
    pub values: Vec<f64>,
}

pub fn series_csv(s: &DailySeries) -> Vec<u8> {
    let mut out = String::from("date,value\n");
    for (d, v) in s.dates().zip(s.values()) {
        out.push_str(&format!("{d},{v}\n"));
    }
    out.into_bytes()
}

pub fn series_json(s: &DailySeries) -> Result<Vec<u8>> {
    to_json(&SeriesJson {
        start_date: s.start(),
        values: s.values().to_vec(),
    })
}

/// Reads a series file; `.json` selects the JSON form, anything else CSV.
pub fn read_series(path: &Path) -> Result<DailySeries> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        let j: SeriesJson = serde_json::from_slice(&bytes)?;
        Ok(DailySeries::new(j.start_date, j.values)?)
    } else {
        parse_dated(bytes.as_slice(), &["value"], false)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyReport {
    pub kind: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub start_date: NaiveDate,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentationReport {
    pub method: &'static str,
    pub model: &'static str,
    pub penalty: PenaltyReport,
    pub n: usize,
    pub start_date: NaiveDate,
    pub changepoint_indices: Vec<usize>,
    /// Last day of each regime but the final one.
    pub changepoint_dates: Vec<NaiveDate>,
    /// First day of each regime after the first.
    pub regime_starts: Vec<NaiveDate>,
    pub segments: Vec<SegmentReport>,
    pub objective: f64,
    pub degenerate: bool,
}

impl SegmentationReport {
    pub fn new(stage: &StageConfig, series: &DailySeries, seg: &Segmentation) -> Result<Self> {
        let model: regimecast_core::changepoint::CostModel = stage.model.into();
        Ok(Self {
            method: stage.method.name(),
            model: model.name(),
            penalty: PenaltyReport {
                kind: stage.penalty_spec()?.name(),
                value: seg.penalty,
            },
            n: series.len(),
            start_date: series.start(),
            changepoint_indices: seg.changepoints.clone(),
            changepoint_dates: seg
                .changepoints
                .iter()
                .map(|&t| series.date_at(t))
                .collect(),
            regime_starts: seg
                .changepoints
                .iter()
                .map(|&t| series.date_at(t + 1))
                .collect(),
            segments: seg
                .segments
                .iter()
                .map(|s| SegmentReport {
                    start_date: series.date_at(s.start),
                    n: s.len,
                    mean: s.mean,
                    variance: s.variance,
                })
                .collect(),
            objective: seg.objective,
            degenerate: seg.degenerate,
        })
    }
}

/// The part of a segmentation report the forecast stage consumes.
#[derive(Debug, Clone, Deserialize)]
struct RegimeStarts {
    regime_starts: Vec<NaiveDate>,
}

pub fn read_regime_starts(path: &Path) -> Result<Vec<NaiveDate>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice::<RegimeStarts>(&bytes)?.regime_starts)
}

/// `date,value,segment` with 0-based segment labels.
pub fn labels_csv(series: &DailySeries, seg: &Segmentation) -> Vec<u8> {
    let mut out = String::from("date,value,segment\n");
    for ((d, v), l) in series.dates().zip(series.values()).zip(seg.labels()) {
        out.push_str(&format!("{d},{v},{l}\n"));
    }
    out.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub test_end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub r2_train: f64,
    pub r2_test: f64,
    pub mse_test: f64,
    pub pred_residual_se: f64,
}

impl From<&FitMetrics> for MetricsReport {
    fn from(m: &FitMetrics) -> Self {
        Self {
            r2_train: m.r_squared_train,
            r2_test: m.r_squared_test,
            mse_test: m.mse_test,
            pred_residual_se: m.pred_residual_se,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    pub orders: [usize; 3],
    pub aicc: Option<f64>,
    pub error: Option<String>,
}

impl From<&GridCell> for GridEntry {
    fn from(c: &GridCell) -> Self {
        Self {
            orders: [c.orders.p, c.orders.d, c.orders.q],
            aicc: c.aicc,
            error: c.error.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    /// AICc of the winner on the common conditioning origin.
    pub score: f64,
    pub grid: Vec<GridEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmaReport {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    pub orders: [usize; 3],
    /// label -> {estimate, se}, in design column order.
    pub coefficients: Map<String, Value>,
    pub arma: ArmaReport,
    pub residual_se: f64,
    pub df: usize,
    pub aicc: Option<f64>,
    /// Regime start dates entering the design.
    pub changepoints: Vec<NaiveDate>,
    /// Dummies constant over the training window, left out of the fit.
    pub dropped: Vec<String>,
    pub smoothing_window: usize,
    pub target_window: usize,
    pub window: Window,
    pub metrics: MetricsReport,
    pub selection: SelectionReport,
}

impl ModelReport {
    pub fn coefficient_map(fit: &RegimeModelFit) -> Map<String, Value> {
        fit.labels
            .iter()
            .zip(&fit.coefficients)
            .zip(&fit.std_errors)
            .map(|((l, b), se)| (l.clone(), serde_json::json!({ "estimate": b, "se": se })))
            .collect()
    }
}

/// `date,raw,smoothed,fitted`.
pub fn predictions_csv(raw: &DailySeries, smoothed: &[f64], fitted: &[f64]) -> Vec<u8> {
    let mut out = String::from("date,raw,smoothed,fitted\n");
    for (((d, r), s), f) in raw.dates().zip(raw.values()).zip(smoothed).zip(fitted) {
        out.push_str(&format!("{d},{r},{s},{f}\n"));
    }
    out.into_bytes()
}
