// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded synthetic data: piecewise-normal regime series, a hospitalization-like
//! series with four variance regimes, the step-dummy regression DGP and
//! INAR(1) counts.
//!
//! Reproducibility contract:
//!
//! - generator: xoshiro256++ seeded from a `u64` through SplitMix64
//!   (the reference `seed_from_u64` expansion);
//! - uniform: `(next_u64 >> 11) * 2^-53`;
//! - normal: one Box-Muller draw per two uniforms,
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`;
//! - Poisson: sequential inversion on chunks of mean at most 30;
//! - binomial thinning: one Bernoulli trial per unit;
//! - stream `i` of seed `s` uses seed `s ^ splitmix64(i)` where
//!   `splitmix64(i)` is the first output of SplitMix64 seeded with `i`.

use alloc::format;
use alloc::vec::Vec;
use chrono::NaiveDate;
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

use crate::series::{moving_average, DailySeries};
use crate::{Error, Result};

const POISSON_CHUNK: f64 = 30.0;

/// Seed of stream `index` derived from a master seed.
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    seed ^ SplitMix64::seed_from_u64(index).next_u64()
}

/// Random stream with the samplers used by every generator.
#[derive(Debug, Clone)]
pub struct Stream(Xoshiro256PlusPlus);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Stream `index` of `seed` (see [`stream_seed`]).
    pub fn derived(seed: u64, index: u64) -> Self {
        Self::new(stream_seed(seed, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }

    pub fn poisson(&mut self, lambda: f64) -> u64 {
        let mut left = lambda;
        let mut total = 0;
        while left > 0.0 {
            let mu = left.min(POISSON_CHUNK);
            left -= mu;
            total += self.poisson_small(mu);
        }
        total
    }

    fn poisson_small(&mut self, mu: f64) -> u64 {
        let u = self.uniform();
        let mut p = (-mu).exp();
        let mut cdf = p;
        let mut x = 0u64;
        // the cap only guards against round-off in the far tail
        while u > cdf && x < 1000 {
            x += 1;
            p *= mu / x as f64;
            cdf += p;
        }
        x
    }

    /// `alpha ∘ x`: number of survivors when each of `x` units is kept with
    /// probability `alpha`.
    pub fn thin(&mut self, x: u64, alpha: f64) -> u64 {
        (0..x).filter(|_| self.uniform() < alpha).count() as u64
    }
}

/// One normal regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub len: usize,
    pub mean: f64,
    pub sd: f64,
}

impl Regime {
    pub const fn new(len: usize, mean: f64, sd: f64) -> Self {
        Self { len, mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeSpec {
    pub start: NaiveDate,
    pub regimes: Vec<Regime>,
    pub seed: u64,
    /// Round draws to non-negative integers.
    pub round: bool,
}

impl RegimeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.regimes.is_empty() {
            return Err(Error::param("regime spec needs at least one segment"));
        }
        for (i, r) in self.regimes.iter().enumerate() {
            if r.len < 2 {
                return Err(Error::param(format!("segment {i}: length {} < 2", r.len)));
            }
            if !(r.sd > 0.0 && r.sd.is_finite()) || !r.mean.is_finite() {
                return Err(Error::param(format!(
                    "segment {i}: need finite mean and SD > 0, got {} / {}",
                    r.mean, r.sd
                )));
            }
        }
        Ok(())
    }
}

/// First day of the paper-shaped EMS window (2019-01-01).
pub fn ems_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date")
}

/// Non-pandemic admitted calls: 442 days at 225.69/19.43, 56 at 155.84/20.23,
/// 233 at 169.53/14.76.
pub fn paper_ems_regimes() -> Vec<Regime> {
    alloc::vec![
        Regime::new(442, 225.69, 19.43),
        Regime::new(56, 155.84, 20.23),
        Regime::new(233, 169.53, 14.76),
    ]
}

/// Independent normal draws per regime, regime `i` on stream `i`.
pub fn gen_piecewise_normal(spec: &RegimeSpec) -> Result<DailySeries> {
    spec.validate()?;
    let mut values = Vec::with_capacity(spec.regimes.iter().map(|r| r.len).sum());
    for (i, r) in spec.regimes.iter().enumerate() {
        let mut s = Stream::derived(spec.seed, i as u64);
        values.extend((0..r.len).map(|_| {
            let v = s.normal(r.mean, r.sd);
            if spec.round {
                v.round().max(0.0)
            } else {
                v
            }
        }));
    }
    DailySeries::new(spec.start, values)
}

/// First day of the hospitalization window (2020-04-09).
pub fn hosp_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 4, 9).expect("valid date")
}

/// Days in 2020-04-09..=2020-12-31.
pub const HOSP_LEN: usize = 267;

/// First days of regimes 2..4: 2020-06-08, 2020-08-18, 2020-11-05.
pub const HOSP_BREAKS: [usize; 3] = [60, 131, 210];

/// Level and SD of each hospitalization regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HospSpec {
    pub levels: [f64; 4],
    pub sds: [f64; 4],
}

impl Default for HospSpec {
    fn default() -> Self {
        // summer and winter surges are noisy, the lulls calm
        Self {
            levels: [30.0, 32.0, 30.0, 34.0],
            sds: [1.5, 12.0, 1.5, 15.0],
        }
    }
}

pub fn gen_hosp_like(seed: u64) -> DailySeries {
    gen_hosp_like_with(&HospSpec::default(), seed).expect("default spec is valid")
}

pub fn gen_hosp_like_with(spec: &HospSpec, seed: u64) -> Result<DailySeries> {
    let bounds = [0, HOSP_BREAKS[0], HOSP_BREAKS[1], HOSP_BREAKS[2], HOSP_LEN];
    let regimes = (0..4)
        .map(|i| Regime::new(bounds[i + 1] - bounds[i], spec.levels[i], spec.sds[i]))
        .collect();
    gen_piecewise_normal(&RegimeSpec {
        start: hosp_start(),
        regimes,
        seed,
        round: false,
    })
}

/// Step-dummy regression data-generating process.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    pub start: NaiveDate,
    pub n: usize,
    /// `(beta_0, beta_h, gamma_1..gamma_k)`.
    pub coefficients: Vec<f64>,
    /// Day index at which each dummy switches on.
    pub offsets: Vec<usize>,
    pub noise_sd: f64,
    /// Trailing window applied to the raw hospitalization regressor.
    pub hosp_window: usize,
    pub seed: u64,
}

impl DgpSpec {
    /// Table-coefficient DGP over the hospitalization window.
    pub fn paper(seed: u64) -> Self {
        Self {
            start: hosp_start(),
            n: HOSP_LEN,
            coefficients: alloc::vec![15.09774, 0.40327, 13.87507, 7.90718, 6.72668],
            offsets: alloc::vec![20, 88, 180],
            noise_sd: 6.619,
            hosp_window: 7,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.len() != self.offsets.len() + 2 {
            return Err(Error::param(format!(
                "{} coefficients for {} changepoints (need k + 2)",
                self.coefficients.len(),
                self.offsets.len()
            )));
        }
        if self.offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("offsets must be strictly increasing"));
        }
        if self.offsets.iter().any(|&o| o == 0 || o >= self.n) {
            return Err(Error::param(format!("offsets must lie in 1..{}", self.n)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::param(format!(
                "noise SD must be >= 0, got {}",
                self.noise_sd
            )));
        }
        if self.hosp_window == 0 || self.hosp_window > self.n {
            return Err(Error::param(format!(
                "hosp window {} invalid for n = {}",
                self.hosp_window, self.n
            )));
        }
        Ok(())
    }

    pub fn changepoint_dates(&self) -> Vec<NaiveDate> {
        self.offsets
            .iter()
            .map(|&o| self.start + chrono::Days::new(o as u64))
            .collect()
    }
}

/// Smooth two-wave hospitalization level used by the regression DGP.
pub fn hosp_level(t: f64) -> f64 {
    25.0 + 50.0 * (-((t - 100.0) / 30.0).powi(2)).exp()
        + 160.0 * (-((t - 250.0) / 50.0).powi(2)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpSample {
    pub hosp_raw: DailySeries,
    pub hosp_smoothed: DailySeries,
    pub target: DailySeries,
    pub changepoints: Vec<NaiveDate>,
}

/// Raw hospitalization `max(0, L(t) + sqrt(L(t)) z)` on stream 0, the
/// target `X beta + noise_sd z` on stream 1, with `X` built from the
/// smoothed regressor and step dummies at `offsets`.
pub fn gen_regression_dgp(spec: &DgpSpec) -> Result<DgpSample> {
    spec.validate()?;
    let mut hs = Stream::derived(spec.seed, 0);
    let raw: Vec<f64> = (0..spec.n)
        .map(|t| {
            let level = hosp_level(t as f64);
            (level + level.sqrt() * hs.standard_normal()).max(0.0)
        })
        .collect();
    let hosp_raw = DailySeries::new(spec.start, raw)?;
    let hosp_smoothed = moving_average(&hosp_raw, spec.hosp_window)?;
    let mut ys = Stream::derived(spec.seed, 1);
    let target: Vec<f64> = hosp_smoothed
        .values()
        .iter()
        .enumerate()
        .map(|(t, h)| {
            let steps: f64 = spec
                .offsets
                .iter()
                .zip(&spec.coefficients[2..])
                .filter(|(o, _)| t >= **o)
                .map(|(_, g)| g)
                .sum();
            spec.coefficients[0]
                + spec.coefficients[1] * h
                + steps
                + spec.noise_sd * ys.standard_normal()
        })
        .collect();
    Ok(DgpSample {
        target: DailySeries::new(spec.start, target)?,
        changepoints: spec.changepoint_dates(),
        hosp_raw,
        hosp_smoothed,
    })
}

/// INAR(1) counts `X_t = alpha ∘ X_{t-1} + eps_t`, `eps_t ~ Poisson(lambda)`,
/// starting from the stationary mean draw (or `eps_0` when `alpha = 1`).
/// Dated from [`ems_start`].
pub fn simulate_inar1(alpha: f64, lambda: f64, n: usize, seed: u64) -> Result<DailySeries> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "thinning probability {alpha} outside [0, 1]"
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!(
            "innovation mean {lambda} must be >= 0"
        )));
    }
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let mut s = Stream::new(seed);
    let mut x = if alpha < 1.0 {
        s.poisson(lambda / (1.0 - alpha))
    } else {
        s.poisson(lambda)
    };
    let mut out = Vec::with_capacity(n);
    out.push(x as f64);
    for _ in 1..n {
        x = s.thin(x, alpha) + s.poisson(lambda);
        out.push(x as f64);
    }
    DailySeries::new(ems_start(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_streams() {
        // xoshiro256++ after SplitMix64 expansion of seed 0
        assert_eq!(Stream::new(0).next_u64(), 0x53175d61490b23df);
        assert_ne!(stream_seed(7, 0), 7);
        assert_ne!(stream_seed(7, 0), stream_seed(7, 1));
    }

    #[test]
    fn uniform_and_normal_moments() {
        let mut s = Stream::new(3);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
        assert!(m.abs() < 0.01 && (v - 1.0).abs() < 0.01);
        let u: Vec<f64> = (0..1000).map(|_| s.uniform()).collect();
        assert!(u.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn poisson_mean_across_chunks() {
        let mut s = Stream::new(11);
        let n = 20_000;
        let m = (0..n).map(|_| s.poisson(75.0) as f64).sum::<f64>() / n as f64;
        assert!((m - 75.0).abs() < 0.3);
        assert_eq!(s.poisson(0.0), 0);
    }

    #[test]
    fn paper_shaped_length() {
        let spec = RegimeSpec {
            start: ems_start(),
            regimes: paper_ems_regimes(),
            seed: 1,
            round: false,
        };
        let s = gen_piecewise_normal(&spec).unwrap();
        assert_eq!(s.len(), 731);
        assert_eq!(s, gen_piecewise_normal(&spec).unwrap());
        let rounded = gen_piecewise_normal(&RegimeSpec {
            round: true,
            ..spec
        })
        .unwrap();
        assert!(rounded.values().iter().all(|v| v.fract() == 0.0));
    }

    #[test]
    fn invalid_specs() {
        let bad = |r: Regime| {
            gen_piecewise_normal(&RegimeSpec {
                start: ems_start(),
                regimes: alloc::vec![r],
                seed: 0,
                round: false,
            })
        };
        assert!(bad(Regime::new(1, 0.0, 1.0)).is_err());
        assert!(bad(Regime::new(5, 0.0, 0.0)).is_err());
        assert!(bad(Regime::new(5, 0.0, 1e-6)).is_ok());
    }

    #[test]
    fn hosp_window() {
        let h = gen_hosp_like(5);
        assert_eq!(h.len(), HOSP_LEN);
        assert_eq!(h.end(), NaiveDate::from_ymd_opt(2020, 12, 31).unwrap());
        assert_eq!(
            h.date_at(HOSP_BREAKS[0]),
            NaiveDate::from_ymd_opt(2020, 6, 8).unwrap()
        );
        assert_eq!(
            h.date_at(HOSP_BREAKS[1]),
            NaiveDate::from_ymd_opt(2020, 8, 18).unwrap()
        );
        assert_eq!(
            h.date_at(HOSP_BREAKS[2]),
            NaiveDate::from_ymd_opt(2020, 11, 5).unwrap()
        );
        let d = HospSpec::default();
        for w in d.sds.windows(2) {
            let r = (w[0] / w[1]).powi(2);
            assert!(r >= 4.0 || r <= 0.25);
        }
    }

    #[test]
    fn dgp_zero_noise_is_exact() {
        let spec = DgpSpec {
            noise_sd: 0.0,
            ..DgpSpec::paper(9)
        };
        let s = gen_regression_dgp(&spec).unwrap();
        let h = s.hosp_smoothed.values()[200];
        let expect = 15.09774 + 0.40327 * h + 13.87507 + 7.90718 + 6.72668;
        assert!((s.target.values()[200] - expect).abs() < 1e-12);
        assert_eq!(
            s.changepoints[0],
            NaiveDate::from_ymd_opt(2020, 4, 29).unwrap()
        );
        let mut bad = DgpSpec::paper(0);
        bad.offsets = alloc::vec![20, 20, 180];
        assert!(gen_regression_dgp(&bad).is_err());
    }

    #[test]
    fn inar_edges() {
        assert!(simulate_inar1(1.2, 1.0, 5, 0).is_err());
        assert!(simulate_inar1(0.5, -1.0, 5, 0).is_err());
        let frozen = simulate_inar1(1.0, 0.0, 50, 4).unwrap();
        assert!(frozen.values().iter().all(|v| *v == frozen.values()[0]));
        let s = simulate_inar1(0.3, 4.0, 500, 4).unwrap();
        assert!(s.values().iter().all(|v| *v >= 0.0 && v.fract() == 0.0));
    }
}
