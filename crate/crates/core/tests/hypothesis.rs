// SPDX-License-Identifier: MIT OR Apache-2.0

use proptest::prelude::*;
use regimecast_core::hypothesis::special::{f_sf, t_sf};
use regimecast_core::hypothesis::{anova_oneway, bonferroni, t_test_greater, welch_test_greater};
use regimecast_core::synth::Stream;

// Upper tails evaluated with 40-digit arithmetic (mpmath betainc).
const T_TAILS: [(f64, f64, f64); 11] = [
    (0.5, 3.0, 0.325_723_982_424_075_5),
    (1.0, 1.0, 0.25),
    (1.7, 5.0, 0.074_938_393_424_161_95),
    (2.1, 10.0, 0.031_038_622_101_109_286),
    (-1.3, 8.0, 0.885_098_187_540_737_3),
    (3.3, 25.0, 0.001_452_610_106_888_454_7),
    (4.9, 209.0, 9.595_722_112_344_65e-7),
    (-0.2, 300.0, 0.579_191_957_885_120_3),
    (7.5, 12.0, 3.616_835_642_361_941e-6),
    (12.0, 40.0, 3.912_085_652_127_986e-15),
    (2.0, 673.0, 0.022_950_833_539_079_472),
];

const F_TAILS: [(f64, f64, f64, f64); 8] = [
    (0.5, 2.0, 6.0, 0.629_737_609_329_446),
    (3.0, 2.0, 6.0, 0.125),
    (1.2, 5.0, 20.0, 0.344_801_499_910_120_2),
    (4.4, 3.0, 40.0, 0.009_116_444_620_572_03),
    (9.0, 1.0, 30.0, 0.005_389_964_065_651_947),
    (0.05, 4.0, 4.0, 0.993_413_238_311_197_5),
    (25.0, 6.0, 200.0, 4.826_106_262_975_658e-22),
    (2.5, 10.0, 10.0, 0.082_253_663_222_720_09),
];

#[test]
fn tails_match_reference() {
    for (t, df, p) in T_TAILS {
        let got = t_sf(t, df);
        assert!((got - p).abs() <= 1e-10 * p, "t={t} df={df}: {got} vs {p}");
    }
    for (f, d1, d2, p) in F_TAILS {
        let got = f_sf(f, d1, d2);
        assert!(
            (got - p).abs() <= 1e-10 * p,
            "F={f} ({d1},{d2}): {got} vs {p}"
        );
    }
}

#[test]
fn bonferroni_family_of_22() {
    let level = bonferroni(0.05, 22).unwrap();
    assert_eq!(level, 0.05 / 22.0);
    assert_eq!(format!("{level:.6}"), "0.002273");
    assert_eq!(bonferroni(0.01, 22).unwrap(), 0.01 / 22.0);
}

fn ks_uniform(mut p: Vec<f64>) -> f64 {
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn null_p_values_are_uniform() {
    let mut s = Stream::new(2024);
    let mut pooled = Vec::new();
    let mut welch = Vec::new();
    for _ in 0..2000 {
        let a: Vec<f64> = (0..12).map(|_| s.normal(5.0, 2.0)).collect();
        let b: Vec<f64> = (0..9).map(|_| s.normal(5.0, 2.0)).collect();
        pooled.push(t_test_greater(&a, &b).unwrap().p_value);
        welch.push(welch_test_greater(&a, &b).unwrap().p_value);
    }
    // 1% critical value of the one-sample KS statistic
    let crit = 1.63 / 2000f64.sqrt();
    assert!(ks_uniform(pooled) < crit);
    assert!(ks_uniform(welch) < crit);
}

#[test]
fn paper_scale_drop_is_detected() {
    // 442 vs 233 days at the reported period means and SDs
    let mut s = Stream::new(5);
    let a: Vec<f64> = (0..442).map(|_| s.normal(225.69, 19.43)).collect();
    let b: Vec<f64> = (0..233).map(|_| s.normal(169.53, 14.76)).collect();
    let r = t_test_greater(&a, &b)
        .unwrap()
        .at_level(bonferroni(0.05, 22).unwrap());
    assert!(r.reject && r.p_value < 1e-100);
    assert_eq!(r.df, 673.0);
}

proptest! {
    #[test]
    fn two_group_anova_is_squared_t(
        a in prop::collection::vec(-50.0f64..50.0, 2..20),
        b in prop::collection::vec(-50.0f64..50.0, 2..20),
    ) {
        let t = t_test_greater(&a, &b).unwrap();
        prop_assume!(t.statistic.is_finite());
        let f = anova_oneway(&[a.clone(), b.clone()]).unwrap();
        prop_assert!((f.statistic - t.statistic * t.statistic).abs() <= 1e-10 * (1.0 + f.statistic));
        // two-sided t tail equals the F tail
        let two_sided = 2.0 * t.p_value.min(1.0 - t.p_value);
        prop_assert!((two_sided - f.p_value).abs() < 1e-10);
    }

    #[test]
    fn p_values_in_unit_interval(
        a in prop::collection::vec(-1e3f64..1e3, 2..30),
        b in prop::collection::vec(-1e3f64..1e3, 2..30),
    ) {
        for r in [t_test_greater(&a, &b).unwrap(), welch_test_greater(&a, &b).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }
    }
}
