// SPDX-License-Identifier: MIT OR Apache-2.0

//! Two-sample t-tests, Bonferroni correction and one-way ANOVA.

pub mod special;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    /// Pooled-variance Student t, `H1: mean(a) > mean(b)`.
    TOneSidedGreater,
    /// Welch t with Satterthwaite degrees of freedom, same alternative.
    WelchOneSidedGreater,
    AnovaF,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::TOneSidedGreater => "t_one_sided_greater",
            TestKind::WelchOneSidedGreater => "welch_one_sided_greater",
            TestKind::AnovaF => "anova_f",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    /// Degrees of freedom (numerator df for F).
    pub df: f64,
    /// Denominator degrees of freedom for F.
    pub df2: Option<f64>,
    pub p_value: f64,
    pub alpha_used: f64,
    pub reject: bool,
    pub kind: TestKind,
}

impl TestResult {
    fn new(kind: TestKind, statistic: f64, df: f64, df2: Option<f64>, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            df,
            df2,
            p_value,
            alpha_used: DEFAULT_ALPHA,
            reject: p_value < DEFAULT_ALPHA,
            kind,
        }
    }

    /// Same test judged at significance level `alpha`.
    pub fn at_level(mut self, alpha: f64) -> Self {
        self.alpha_used = alpha;
        self.reject = self.p_value < alpha;
        self
    }
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Size(format!(
            "t-test needs at least 2 observations per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Upper-tail p-value for a statistic whose scale may be zero.
fn degenerate_t(diff: f64) -> (f64, f64) {
    match diff.partial_cmp(&0.0) {
        Some(Ordering::Greater) => (f64::INFINITY, 0.0),
        Some(Ordering::Less) => (f64::NEG_INFINITY, 1.0),
        _ => (0.0, 0.5),
    }
}

/// Pooled-variance two-sample t-test of `mean(a) > mean(b)`.
pub fn t_test_greater(a: &[f64], b: &[f64]) -> Result<TestResult> {
    check_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    let se = (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    let diff = ma - mb;
    let (t, p) = if se > 0.0 {
        let t = diff / se;
        (t, special::t_sf(t, df))
    } else {
        degenerate_t(diff)
    };
    Ok(TestResult::new(TestKind::TOneSidedGreater, t, df, None, p))
}

/// Welch two-sample t-test of `mean(a) > mean(b)`.
pub fn welch_test_greater(a: &[f64], b: &[f64]) -> Result<TestResult> {
    check_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (qa, qb) = (va / na, vb / nb);
    let se = (qa + qb).sqrt();
    let diff = ma - mb;
    if se > 0.0 {
        let df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
        let t = diff / se;
        Ok(TestResult::new(
            TestKind::WelchOneSidedGreater,
            t,
            df,
            None,
            special::t_sf(t, df),
        ))
    } else {
        let (t, p) = degenerate_t(diff);
        Ok(TestResult::new(
            TestKind::WelchOneSidedGreater,
            t,
            na + nb - 2.0,
            None,
            p,
        ))
    }
}

/// Per-test level after Bonferroni correction for `m` simultaneous tests.
pub fn bonferroni(alpha: f64, m: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if m == 0 {
        return Err(Error::param("bonferroni needs m >= 1"));
    }
    Ok(alpha / m as f64)
}

/// One-way ANOVA F-test across `groups`.
pub fn anova_oneway<G: AsRef<[f64]>>(groups: &[G]) -> Result<TestResult> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::Size(format!(
            "ANOVA needs at least 2 groups, got {k}"
        )));
    }
    if let Some((i, g)) = groups
        .iter()
        .enumerate()
        .find(|(_, g)| g.as_ref().len() < 2)
    {
        return Err(Error::Size(format!(
            "ANOVA group {i} has {} observations, need at least 2",
            g.as_ref().len()
        )));
    }
    let total: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let grand = groups.iter().flat_map(|g| g.as_ref()).sum::<f64>() / total as f64;
    let (mut ssb, mut ssw) = (0.0, 0.0);
    for g in groups {
        let g = g.as_ref();
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand) * (m - grand);
        ssw += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    let df1 = (k - 1) as f64;
    let df2 = (total - k) as f64;
    let (f, p) = if ssw > 0.0 {
        let f = (ssb / df1) / (ssw / df2);
        (f, special::f_sf(f, df1, df2))
    } else if ssb > 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        return Err(Error::Undefined(String::from(
            "F is 0/0: no variation within or between groups",
        )));
    };
    Ok(TestResult::new(TestKind::AnovaF, f, df1, Some(df2), p))
}

/// One problem's outcome in a [`multi_compare`] family.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub problem: String,
    pub n1: usize,
    pub n2: usize,
    pub mean1: f64,
    pub mean2: f64,
    pub outcome: Result<TestResult>,
}

/// Pooled t-tests of `first > second` for every problem, judged at the
/// Bonferroni level `alpha / m`. Results are ordered by p-value (then name);
/// failed tests come last.
pub fn multi_compare<S, A, B>(family: &[(S, A, B)], alpha: f64) -> Result<Vec<Comparison>>
where
    S: AsRef<str>,
    A: AsRef<[f64]>,
    B: AsRef<[f64]>,
{
    let level = bonferroni(alpha, family.len())?;
    let mean = |x: &[f64]| {
        if x.is_empty() {
            f64::NAN
        } else {
            x.iter().sum::<f64>() / x.len() as f64
        }
    };
    let mut out: Vec<Comparison> = family
        .iter()
        .map(|(name, a, b)| {
            let (a, b) = (a.as_ref(), b.as_ref());
            Comparison {
                problem: String::from(name.as_ref()),
                n1: a.len(),
                n2: b.len(),
                mean1: mean(a),
                mean2: mean(b),
                outcome: t_test_greater(a, b).map(|r| r.at_level(level)),
            }
        })
        .collect();
    out.sort_by(|x, y| {
        let key = |c: &Comparison| {
            c.outcome
                .as_ref()
                .map(|r| r.p_value)
                .unwrap_or(f64::INFINITY)
        };
        key(x)
            .total_cmp(&key(y))
            .then_with(|| x.problem.cmp(&y.problem))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identical_samples() {
        let r = t_test_greater(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 0.5));
        assert_eq!(r.df, 4.0);
    }

    #[test]
    fn wrong_direction_is_near_one() {
        let r = t_test_greater(&[1.0, 2.0, 3.0], &[11.0, 12.0, 13.0]).unwrap();
        // t = -10 / sqrt(2/3) on 4 df
        assert!((r.statistic + 10.0 / (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(r.p_value > 0.9998);
        assert!(!r.reject);
    }

    #[test]
    fn zero_variance_conventions() {
        assert_eq!(
            t_test_greater(&[2.0, 2.0], &[2.0, 2.0]).unwrap().p_value,
            0.5
        );
        assert_eq!(
            t_test_greater(&[3.0, 3.0], &[2.0, 2.0]).unwrap().p_value,
            0.0
        );
        assert_eq!(
            t_test_greater(&[1.0, 1.0], &[2.0, 2.0]).unwrap().p_value,
            1.0
        );
        assert!(t_test_greater(&[1.0], &[2.0, 2.0]).is_err());
    }

    #[test]
    fn bonferroni_levels() {
        assert!((bonferroni(0.05, 22).unwrap() - 0.002_272_727_272_727_273).abs() < 1e-18);
        assert!((bonferroni(0.05, 22).unwrap() - 0.002273).abs() < 5e-7);
        assert_eq!(bonferroni(0.05, 1).unwrap(), 0.05);
        assert_eq!(bonferroni(0.01, 4).unwrap(), 0.0025);
        assert!(bonferroni(1.0, 3).is_err());
        assert!(bonferroni(0.05, 0).is_err());
    }

    #[test]
    fn anova_hand_example() {
        let r = anova_oneway(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 3.0, 4.0],
            vec![3.0, 4.0, 5.0],
        ])
        .unwrap();
        assert!((r.statistic - 3.0).abs() < 1e-12);
        assert_eq!((r.df, r.df2), (2.0, Some(6.0)));
        // F(2, 6) tail at 3 is (1 + 2*3/6)^(-3) = 1/8.
        assert!((r.p_value - 0.125).abs() < 1e-12);
    }

    #[test]
    fn anova_degenerate_cases() {
        let same = anova_oneway(&[[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]).unwrap();
        assert_eq!((same.statistic, same.p_value), (0.0, 1.0));
        assert!(matches!(
            anova_oneway(&[[1.0, 1.0], [1.0, 1.0]]),
            Err(Error::Undefined(_))
        ));
        let apart = anova_oneway(&[[1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert_eq!(apart.p_value, 0.0);
        assert!(anova_oneway(&[[1.0, 2.0]]).is_err());
        assert!(anova_oneway(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn multi_compare_uses_family_level() {
        let family: Vec<(String, Vec<f64>, Vec<f64>)> = (0..22)
            .map(|i| {
                let shift = i as f64 * 0.1;
                (
                    format!("p{i:02}"),
                    vec![5.0 + shift, 6.0 + shift, 7.0 + shift],
                    vec![5.0, 6.0, 7.5],
                )
            })
            .collect();
        let out = multi_compare(&family, 0.05).unwrap();
        assert_eq!(out.len(), 22);
        for c in &out {
            assert!((c.outcome.as_ref().unwrap().alpha_used - 0.05 / 22.0).abs() < 1e-18);
        }
        let ps: Vec<f64> = out
            .iter()
            .map(|c| c.outcome.as_ref().unwrap().p_value)
            .collect();
        assert!(ps.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn multi_compare_keeps_partial_results() {
        let family = [
            ("ok", vec![3.0, 4.0, 5.0], vec![1.0, 2.0, 3.0]),
            ("short", vec![3.0], vec![1.0, 2.0]),
        ];
        let out = multi_compare(&family, 0.05).unwrap();
        assert_eq!(out[0].problem, "ok");
        assert!(out[1].outcome.is_err());
        let single = multi_compare(&family[..1], 0.05).unwrap();
        assert_eq!(single[0].outcome.as_ref().unwrap().alpha_used, 0.05);
    }

    #[test]
    fn welch_matches_pooled_for_equal_designs() {
        let a = [1.0, 2.0, 4.0, 7.0];
        let b = [0.0, 1.0, 1.5, 2.0];
        let w = welch_test_greater(&a, &b).unwrap();
        let p = t_test_greater(&a, &b).unwrap();
        // Equal sizes give the same statistic; only df differs.
        assert!((w.statistic - p.statistic).abs() < 1e-12);
        assert!(w.df < p.df);
    }
}
