// SPDX-License-Identifier: MIT OR Apache-2.0

//! Regression with ARMA(p, q) errors on the d-th difference, fitted by
//! conditional sum of squares with the regression coefficients profiled out.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::linalg::{least_squares, LeastSquares};
use super::optim::NelderMead;
use super::{aicc, ArimaOrder, DesignMatrix, RegimeModelFit};
use crate::{Error, Result};

/// Objective evaluations allowed per fit.
pub const EVALUATION_BUDGET: usize = 500;

/// Grid scores share this conditioning origin (original index) so that every
/// cell is scored on the same observations.
const COMMON_ORIGIN: usize = 3;
const MAX_P: usize = 2;
const MAX_D: usize = 1;
const MAX_Q: usize = 2;

/// Reflection coefficients must stay within `1 - UNIT_MARGIN`; conditional
/// sums of squares otherwise drift onto MA unit roots.
const UNIT_MARGIN: f64 = 0.01;

/// Roots of `1 - phi_1 z - ... - phi_p z^p` lie outside the unit circle, with
/// every reflection coefficient at most `1 - UNIT_MARGIN` in modulus.
/// Uses the Levinson step-down recursion.
pub fn is_stationary(phi: &[f64]) -> bool {
    let mut a = phi.to_vec();
    while let Some(&k) = a.last() {
        if k.is_nan() || k.abs() >= 1.0 - UNIT_MARGIN {
            return false;
        }
        let j = a.len() - 1;
        let denom = 1.0 - k * k;
        let prev: Vec<f64> = (0..j).map(|i| (a[i] + k * a[j - 1 - i]) / denom).collect();
        a = prev;
    }
    true
}

/// Roots of `1 + theta_1 z + ... + theta_q z^q` lie outside the unit circle.
pub fn is_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    is_stationary(&neg)
}

/// Innovations of the ARMA filter for `t >= s0`, zero innovations before.
fn arma_filter(z: &[f64], phi: &[f64], theta: &[f64], s0: usize) -> Vec<f64> {
    let mut e = vec![0.0; z.len()];
    for t in s0..z.len() {
        let mut v = z[t];
        for (i, p) in phi.iter().enumerate() {
            v -= p * z[t - i - 1];
        }
        for (j, th) in theta.iter().enumerate() {
            if t > s0 + j {
                v -= th * e[t - j - 1];
            }
        }
        e[t] = v;
    }
    e.split_off(s0)
}

/// Differenced working data with constant columns set aside.
struct Working {
    y: Vec<f64>,
    cols: Vec<Vec<f64>>,
    /// Indices (into the original design) of `cols`.
    kept: Vec<usize>,
    /// Constant column absorbed by differencing.
    level: Option<usize>,
}

fn working(x: &DesignMatrix, y: &[f64], d: usize) -> Result<Working> {
    if d == 0 {
        return Ok(Working {
            y: y.to_vec(),
            cols: x.columns().to_vec(),
            kept: (0..x.ncols()).collect(),
            level: None,
        });
    }
    let diff = |v: &[f64]| -> Vec<f64> { v.windows(2).map(|w| w[1] - w[0]).collect() };
    let mut w = Working {
        y: diff(y),
        cols: Vec::new(),
        kept: Vec::new(),
        level: None,
    };
    for (j, c) in x.columns().iter().enumerate() {
        let dc = diff(c);
        if dc.iter().all(|v| *v == 0.0) {
            if w.level.replace(j).is_some() {
                return Err(Error::Design("more than one constant column".into()));
            }
        } else {
            w.cols.push(dc);
            w.kept.push(j);
        }
    }
    Ok(w)
}

struct Profile<'a> {
    w: &'a Working,
    p: usize,
    s0: usize,
}

impl Profile<'_> {
    fn solve(&self, params: &[f64]) -> Option<LeastSquares> {
        let (phi, theta) = params.split_at(self.p);
        if !is_stationary(phi) || !is_invertible(theta) {
            return None;
        }
        let y = arma_filter(&self.w.y, phi, theta, self.s0);
        let cols: Vec<Vec<f64>> = self
            .w
            .cols
            .iter()
            .map(|c| arma_filter(c, phi, theta, self.s0))
            .collect();
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        least_squares(&refs, &y)
            .ok()
            .filter(|ls| ls.rss.is_finite())
    }

    fn css(&self, params: &[f64]) -> f64 {
        self.solve(params).map_or(f64::INFINITY, |ls| ls.rss)
    }
}

/// Fit with conditioning origin `s0` in the differenced index.
fn fit_at(x: &DesignMatrix, y: &[f64], orders: ArimaOrder, s0: usize) -> Result<RegimeModelFit> {
    let ArimaOrder { p, d, q } = orders;
    if p > MAX_P || d > MAX_D || q > MAX_Q {
        return Err(Error::param(format!(
            "orders {orders} outside p,q <= 2, d <= 1"
        )));
    }
    if y.len() != x.nrows() {
        return Err(Error::Design(format!(
            "{} design rows for {} targets",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() <= d {
        return Err(Error::Size(format!(
            "{} rows cannot be differenced {d} times",
            x.nrows()
        )));
    }
    let w = working(x, y, d)?;
    let k = w.cols.len();
    let m = w.y.len().saturating_sub(s0);
    if m < k + p + q + 1 {
        return Err(Error::Size(format!(
            "{m} usable rows for {k} coefficients and {} ARMA parameters",
            p + q
        )));
    }
    let profile = Profile { w: &w, p, s0 };
    let start = vec![0.0; p + q];
    if profile.solve(&start).is_none() {
        return Err(Error::Design(format!(
            "regression on {orders} working data is rank deficient"
        )));
    }
    let nm = NelderMead {
        max_evaluations: EVALUATION_BUDGET,
        ..NelderMead::default()
    };
    let min = nm.minimize(|v| profile.css(v), &start);
    let ls = profile
        .solve(&min.x)
        .ok_or_else(|| Error::NoFit(format!("{orders}: optimum left the admissible region")))?;

    let df = m - k - p - q;
    let sigma2 = ls.rss / df as f64;
    let mut coefficients = vec![0.0; x.ncols()];
    let mut std_errors = vec![None; x.ncols()];
    for (slot, &j) in w.kept.iter().enumerate() {
        coefficients[j] = ls.beta[slot];
        std_errors[j] = Some((sigma2 * ls.xtx_inv_diag[slot]).sqrt());
    }
    if let Some(j) = w.level {
        // Level is not identified after differencing; take the mean offset.
        let c = x.column(j)[0];
        let resid: f64 = (0..x.nrows())
            .map(|i| {
                y[i] - w
                    .kept
                    .iter()
                    .map(|&l| x.column(l)[i] * coefficients[l])
                    .sum::<f64>()
            })
            .sum();
        coefficients[j] = resid / x.nrows() as f64 / c;
    }
    let fit = RegimeModelFit {
        labels: x.labels().to_vec(),
        coefficients,
        std_errors,
        orders,
        phi: min.x[..p].to_vec(),
        theta: min.x[p..].to_vec(),
        residual_se: sigma2.sqrt(),
        df,
        n_used: m,
        css: ls.rss,
        aicc: aicc(ls.rss, m, k + p + q + 1),
    };
    if min.converged {
        Ok(fit)
    } else {
        Err(Error::Convergence {
            evaluations: min.evaluations,
            best: Box::new(fit),
        })
    }
}

/// Regression with ARIMA(p, d, q) errors, conditioning on the first `p`
/// differenced observations. `(0,0,0)` is OLS.
pub fn fit_arma_errors(x: &DesignMatrix, y: &[f64], orders: ArimaOrder) -> Result<RegimeModelFit> {
    fit_at(x, y, orders, orders.p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub orders: ArimaOrder,
    /// AICc on the common conditioning window, `None` if the cell failed.
    pub aicc: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Winning orders refitted with their own conditioning origin.
    pub fit: RegimeModelFit,
    pub score: f64,
    pub grid: Vec<GridCell>,
}

/// Scores every (p, d, q) with p, q in 0..=2 and d in 0..=1 by AICc on a
/// common window and refits the minimizer. Ties go to fewer parameters,
/// then lower p.
pub fn stepwise_select(x: &DesignMatrix, y: &[f64]) -> Result<Selection> {
    let mut grid = Vec::new();
    let mut best: Option<(ArimaOrder, f64, usize, RegimeModelFit)> = None;
    for p in 0..=MAX_P {
        for d in 0..=MAX_D {
            for q in 0..=MAX_Q {
                let orders = ArimaOrder::new(p, d, q);
                let outcome = fit_at(x, y, orders, COMMON_ORIGIN - d).and_then(|f| {
                    f.aicc
                        .map(|a| {
                            (
                                a,
                                f.coefficients.len() - usize::from(d == 1 && has_level(x)) + p + q,
                                f,
                            )
                        })
                        .ok_or_else(|| Error::Size("too few rows for AICc".into()))
                });
                match outcome {
                    Ok((score, params, fit)) => {
                        grid.push(GridCell {
                            orders,
                            aicc: Some(score),
                            error: None,
                        });
                        let better = match &best {
                            None => true,
                            Some((bo, bs, bp, _)) => {
                                score < *bs
                                    || (score == *bs
                                        && (params < *bp || (params == *bp && p < bo.p)))
                            }
                        };
                        if better {
                            best = Some((orders, score, params, fit));
                        }
                    }
                    Err(e) => grid.push(GridCell {
                        orders,
                        aicc: None,
                        error: Some(e.to_string()),
                    }),
                }
            }
        }
    }
    let Some((orders, score, _, common)) = best else {
        let reasons: Vec<String> = grid
            .iter()
            .map(|c| format!("{}: {}", c.orders, c.error.as_deref().unwrap_or("?")))
            .collect();
        return Err(Error::NoFit(reasons.join("; ")));
    };
    let fit = fit_arma_errors(x, y, orders).unwrap_or(common);
    Ok(Selection { fit, score, grid })
}

fn has_level(x: &DesignMatrix) -> bool {
    x.columns()
        .iter()
        .any(|c| c.windows(2).all(|w| w[0] == w[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::fit_ols;

    #[test]
    fn step_down_regions() {
        assert!(is_stationary(&[]));
        assert!(is_stationary(&[0.9]) && !is_stationary(&[0.995]) && !is_stationary(&[-1.2]));
        assert!(is_stationary(&[1.5, -0.75]));
        assert!(!is_stationary(&[0.5, 0.6]));
        assert!(!is_stationary(&[0.2, -1.0]));
        assert!(is_invertible(&[0.5]) && !is_invertible(&[-1.5]));
        assert!(!is_stationary(&[f64::NAN]));
    }

    #[test]
    fn filter_is_ar_residual() {
        let z = [1.0, 2.0, 4.0, 3.0];
        assert_eq!(arma_filter(&z, &[0.5], &[], 1), [1.5, 3.0, 1.0]);
        // MA(1): e_t = z_t - theta e_{t-1}, e_{s0-1} = 0
        assert_eq!(arma_filter(&z, &[], &[0.5], 0), [1.0, 1.5, 3.25, 1.375]);
    }

    fn toy() -> (DesignMatrix, Vec<f64>) {
        let n = 60;
        let h: Vec<f64> = (0..n)
            .map(|t| 10.0 + 5.0 * (t as f64 * 0.3).sin())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|t| {
                2.0 + 0.5 * h[t] + if t >= 30 { 4.0 } else { 0.0 } + ((t * 7919) % 13) as f64 / 6.0
            })
            .collect();
        let x = DesignMatrix::from_columns(
            ["intercept", "hosp", "cp1"].map(String::from).to_vec(),
            vec![
                vec![1.0; n],
                h,
                (0..n).map(|t| f64::from(u8::from(t >= 30))).collect(),
            ],
        )
        .unwrap();
        (x, y)
    }

    #[test]
    fn white_orders_equal_ols() {
        let (x, y) = toy();
        let a = fit_arma_errors(&x, &y, ArimaOrder::default()).unwrap();
        let b = fit_ols(&x, &y).unwrap();
        for (u, v) in a.coefficients.iter().zip(&b.coefficients) {
            assert!((u - v).abs() < 1e-10);
        }
        assert_eq!(a.df, b.df);
        assert!((a.residual_se - b.residual_se).abs() < 1e-10);
    }

    #[test]
    fn differenced_fit_reports_level() {
        let (x, y) = toy();
        let f = fit_arma_errors(&x, &y, ArimaOrder::new(0, 1, 1)).unwrap();
        assert!(f.std_errors[0].is_none() && f.std_errors[1].is_some());
        assert!(f.coefficients[0].is_finite());
        assert!(is_invertible(&f.theta));
    }

    #[test]
    fn grid_minimum_is_selected() {
        let (x, y) = toy();
        let sel = stepwise_select(&x, &y).unwrap();
        assert_eq!(sel.grid.len(), 18);
        let min = sel
            .grid
            .iter()
            .filter_map(|c| c.aicc)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(sel.score, min);
    }

    #[test]
    fn tiny_sample_still_fits() {
        let n = 9;
        let x = DesignMatrix::from_columns(
            ["intercept", "hosp"].map(String::from).to_vec(),
            vec![vec![1.0; n], (0..n).map(|t| (t * t) as f64).collect()],
        )
        .unwrap();
        let y: Vec<f64> = (0..n).map(|t| 1.0 + t as f64 + (t % 3) as f64).collect();
        let sel = stepwise_select(&x, &y).unwrap();
        assert!(sel.grid.iter().any(|c| c.aicc.is_none()));
    }
}
