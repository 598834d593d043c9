// SPDX-License-Identifier: MIT OR Apache-2.0

//! Step-dummy regime regression: design construction, chronological split,
//! OLS, regression with ARMA errors and forecast metrics.

mod arma;
pub mod linalg;
pub mod optim;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use chrono::NaiveDate;
#[allow(unused_imports)]
use num_traits::Float;

use crate::series::DailySeries;
use crate::{Error, Result};

pub use arma::{
    fit_arma_errors, is_invertible, is_stationary, stepwise_select, GridCell, Selection,
    EVALUATION_BUDGET,
};

pub const INTERCEPT: &str = "intercept";
pub const HOSP: &str = "hosp";

/// Regression design stored by column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    start: Option<NaiveDate>,
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl DesignMatrix {
    /// Arbitrary design from named columns of equal, non-zero length.
    pub fn from_columns(labels: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != columns.len() || columns.is_empty() {
            return Err(Error::Design(format!(
                "{} labels for {} columns",
                labels.len(),
                columns.len()
            )));
        }
        let n = columns[0].len();
        if n == 0 || columns.iter().any(|c| c.len() != n) {
            return Err(Error::Design("columns must share a non-zero length".into()));
        }
        Ok(Self {
            start: None,
            labels,
            columns,
        })
    }

    pub fn nrows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Date of row 0 when the design was built from a dated series.
    pub fn start(&self) -> Option<NaiveDate> {
        self.start
    }

    /// Rows `from..to`.
    pub fn rows(&self, from: usize, to: usize) -> Self {
        Self {
            start: self.start.map(|d| d + chrono::Days::new(from as u64)),
            labels: self.labels.clone(),
            columns: self.columns.iter().map(|c| c[from..to].to_vec()).collect(),
        }
    }

    /// Drops columns by label (used for dummies that are constant on a window).
    pub fn without(&self, drop: &[&str]) -> Self {
        let (labels, columns) = self
            .labels
            .iter()
            .zip(&self.columns)
            .filter(|(l, _)| !drop.contains(&l.as_str()))
            .map(|(l, c)| (l.clone(), c.clone()))
            .unzip();
        Self {
            start: self.start,
            labels,
            columns,
        }
    }

    pub fn check_rank(&self) -> Result<()> {
        let cols: Vec<&[f64]> = self.columns.iter().map(Vec::as_slice).collect();
        let y = alloc::vec![0.0; self.nrows()];
        linalg::least_squares(&cols, &y)
            .map(|_| ())
            .map_err(|e| self.rank_error(e))
    }

    fn rank_error(&self, e: linalg::RankDeficient) -> Error {
        match self.labels.get(e.0) {
            Some(l) => Error::Design(format!("rank deficient: column '{l}' is collinear")),
            None => Error::Design(format!(
                "rank deficient: {} rows for {} columns",
                self.nrows(),
                self.ncols()
            )),
        }
    }
}

/// Intercept, the exogenous series and one step dummy per changepoint date.
/// A dummy is 1 from its date onwards.
pub fn build_design(hosp: &DailySeries, changepoints: &[NaiveDate]) -> Result<DesignMatrix> {
    if changepoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(
            "changepoint dates must be strictly increasing",
        ));
    }
    let n = hosp.len();
    let mut labels = alloc::vec![INTERCEPT.to_string(), HOSP.to_string()];
    let mut columns = alloc::vec![alloc::vec![1.0; n], hosp.values().to_vec()];
    for (j, &date) in changepoints.iter().enumerate() {
        let at = hosp.index_of(date).ok_or_else(|| {
            Error::Range(format!(
                "changepoint {date} outside series span {}..{}",
                hosp.start(),
                hosp.end()
            ))
        })?;
        if at == 0 {
            return Err(Error::Design(format!(
                "changepoint {date} on the first day makes cp{} equal the intercept",
                j + 1
            )));
        }
        labels.push(format!("cp{}", j + 1));
        columns.push((0..n).map(|t| if t >= at { 1.0 } else { 0.0 }).collect());
    }
    let design = DesignMatrix {
        start: Some(hosp.start()),
        labels,
        columns,
    };
    design.check_rank()?;
    Ok(design)
}

/// Number of training rows for a chronological split.
pub fn split_point(n: usize, train_fraction: f64) -> Result<usize> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::param(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    Ok((train_fraction * n as f64).round() as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub x_train: DesignMatrix,
    pub y_train: DailySeries,
    pub x_test: DesignMatrix,
    pub y_test: DailySeries,
}

/// First `round(fraction * n)` rows train, the rest test.
pub fn split_chronological(
    y: &DailySeries,
    x: &DesignMatrix,
    train_fraction: f64,
) -> Result<Split> {
    let n = y.len();
    if x.nrows() != n {
        return Err(Error::Design(format!(
            "{} design rows for {n} targets",
            x.nrows()
        )));
    }
    let cut = split_point(n, train_fraction)?;
    if cut < x.ncols() + 2 {
        return Err(Error::Size(format!(
            "{cut} training rows for {} coefficients",
            x.ncols()
        )));
    }
    if cut >= n {
        return Err(Error::Size(format!(
            "split of {n} rows leaves no test rows"
        )));
    }
    let (head, tail) = y.values().split_at(cut);
    Ok(Split {
        x_train: x.rows(0, cut),
        y_train: DailySeries::new(y.start(), head.to_vec())?,
        x_test: x.rows(cut, n),
        y_test: DailySeries::new(y.date_at(cut), tail.to_vec())?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub const fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q }
    }
}

impl core::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeModelFit {
    pub labels: Vec<String>,
    pub coefficients: Vec<f64>,
    /// `None` where no standard error is available (intercept under d = 1).
    pub std_errors: Vec<Option<f64>>,
    pub orders: ArimaOrder,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub residual_se: f64,
    pub df: usize,
    /// Residual (innovation) count entering the objective.
    pub n_used: usize,
    pub css: f64,
    /// `None` when the sample is too small for the correction term.
    pub aicc: Option<f64>,
}

impl RegimeModelFit {
    pub fn coefficient(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.coefficients[i])
    }
}

/// AICc from the Gaussian likelihood of `m` conditional residuals.
pub(crate) fn aicc(css: f64, m: usize, params: usize) -> Option<f64> {
    let (mf, kf) = (m as f64, params as f64);
    if m <= params + 1 {
        return None;
    }
    let sigma2 = css / mf;
    let ll = -0.5 * mf * ((2.0 * core::f64::consts::PI * sigma2).ln() + 1.0);
    Some(-2.0 * ll + 2.0 * kf + 2.0 * kf * (kf + 1.0) / (mf - kf - 1.0))
}

/// Ordinary least squares, i.e. ARIMA(0,0,0) errors.
pub fn fit_ols(x: &DesignMatrix, y: &[f64]) -> Result<RegimeModelFit> {
    let (n, k) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(Error::Design(format!(
            "{n} design rows for {} targets",
            y.len()
        )));
    }
    if n < k + 1 {
        return Err(Error::Size(format!("{n} rows for {k} coefficients")));
    }
    let cols: Vec<&[f64]> = x.columns.iter().map(Vec::as_slice).collect();
    let ls = linalg::least_squares(&cols, y).map_err(|e| x.rank_error(e))?;
    let df = n - k;
    let sigma2 = ls.rss / df as f64;
    Ok(RegimeModelFit {
        labels: x.labels.clone(),
        std_errors: ls
            .xtx_inv_diag
            .iter()
            .map(|v| Some((sigma2 * v).sqrt()))
            .collect(),
        coefficients: ls.beta,
        orders: ArimaOrder::default(),
        phi: Vec::new(),
        theta: Vec::new(),
        residual_se: sigma2.sqrt(),
        df,
        n_used: n,
        css: ls.rss,
        aicc: aicc(ls.rss, n, k + 1),
    })
}

/// `X beta`. ARMA error forecasts vanish under the zero-history convention.
pub fn predict(fit: &RegimeModelFit, x: &DesignMatrix) -> Result<Vec<f64>> {
    if x.labels != fit.labels {
        return Err(Error::Design(format!(
            "design columns {:?} do not match fitted {:?}",
            x.labels, fit.labels
        )));
    }
    Ok((0..x.nrows())
        .map(|i| {
            x.columns
                .iter()
                .zip(&fit.coefficients)
                .map(|(c, b)| c[i] * b)
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitMetrics {
    pub r_squared_train: f64,
    pub r_squared_test: f64,
    pub mse_test: f64,
    pub pred_residual_se: f64,
}

fn r_squared(target: &[f64], fitted: &[f64]) -> Result<f64> {
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let ss_tot: f64 = target.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::Undefined(
            "r-squared: smoothed target has zero variance".into(),
        ));
    }
    let ss_res: f64 = target
        .iter()
        .zip(fitted)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// r-squared against the smoothed target; MSE and prediction-residual SD
/// against the raw target.
pub fn evaluate(
    fit: &RegimeModelFit,
    x_test: &DesignMatrix,
    y_raw_test: &[f64],
    y_smoothed_test: &[f64],
    y_smoothed_train: &[f64],
    x_train: &DesignMatrix,
) -> Result<FitMetrics> {
    let m = x_test.nrows();
    if y_raw_test.len() != m || y_smoothed_test.len() != m {
        return Err(Error::Design(
            "test targets and design differ in length".into(),
        ));
    }
    if y_smoothed_train.len() != x_train.nrows() {
        return Err(Error::Design(
            "training target and design differ in length".into(),
        ));
    }
    if m < 2 {
        return Err(Error::Size(
            "prediction residual SD needs 2 test rows".into(),
        ));
    }
    let fitted_train = predict(fit, x_train)?;
    let fitted_test = predict(fit, x_test)?;
    let resid: Vec<f64> = y_raw_test
        .iter()
        .zip(&fitted_test)
        .map(|(a, b)| a - b)
        .collect();
    let mse_test = resid.iter().map(|e| e * e).sum::<f64>() / m as f64;
    let mean = resid.iter().sum::<f64>() / m as f64;
    let var = resid.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    Ok(FitMetrics {
        r_squared_train: r_squared(y_smoothed_train, &fitted_train)?,
        r_squared_test: r_squared(y_smoothed_test, &fitted_test)?,
        mse_test,
        pred_residual_se: var.sqrt(),
    })
}
