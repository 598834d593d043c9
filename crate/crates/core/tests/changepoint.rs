// SPDX-License-Identifier: MIT OR Apache-2.0

use proptest::prelude::*;
use regimecast_core::changepoint::{
    binseg, exact_oracle, pelt, CostModel, Detector, PenaltySpec, SegmentCost, VarianceCentre,
};
use regimecast_core::synth::Stream;

const MODELS: [CostModel; 3] = [CostModel::Mean, CostModel::Variance, CostModel::MeanVar];

/// Unpruned optimal partitioning over the same costs.
fn optimal_partitioning(data: &[f64], model: CostModel, penalty: PenaltySpec) -> (f64, Vec<usize>) {
    let beta = regimecast_core::changepoint::penalty_value(&penalty, data.len(), model).unwrap();
    let cost = SegmentCost::new(data, model, VarianceCentre::Global, penalty.augments_cost());
    let n = data.len();
    let min = model.min_segment_len();
    let mut f = vec![f64::INFINITY; n + 1];
    let mut last = vec![0usize; n + 1];
    f[0] = -beta;
    for t in min..=n {
        for s in (0..=t - min).filter(|&s| s == 0 || s >= min) {
            let v = f[s] + cost.cost(s, t) + beta;
            if v < f[t] {
                f[t] = v;
                last[t] = s;
            }
        }
    }
    let mut cps = Vec::new();
    let mut t = n;
    while last[t] > 0 {
        cps.push(last[t] - 1);
        t = last[t];
    }
    cps.reverse();
    (f[n], cps)
}

fn piecewise(n: usize, seed: u64) -> Vec<f64> {
    let mut s = Stream::new(seed);
    let cut = n / 2 + (s.next_u64() % 5) as usize;
    (0..n)
        .map(|t| {
            let (m, sd) = if t < cut { (0.0, 1.0) } else { (3.0, 2.5) };
            s.normal(m, sd)
        })
        .collect()
}

#[test]
fn step_series_oracle_example() {
    let mut s = Stream::new(42);
    let data: Vec<f64> = (0..200)
        .map(|t| s.normal(if t < 100 { 0.0 } else { 10.0 }, 1.0))
        .collect();
    let seg = binseg(&data, CostModel::MeanVar, PenaltySpec::Bic, 2).unwrap();
    assert_eq!(seg.changepoints.len(), 1);
    assert!(seg.changepoints[0].abs_diff(99) <= 1);
    let p = pelt(&data, CostModel::MeanVar, PenaltySpec::Bic).unwrap();
    assert_eq!(p.changepoints, seg.changepoints);
}

#[test]
fn huge_penalty_means_no_changepoints() {
    let data = piecewise(50, 3);
    for m in MODELS {
        assert!(pelt(&data, m, PenaltySpec::Manual(1e18))
            .unwrap()
            .is_empty());
        assert!(pelt(&data, m, PenaltySpec::Manual(f64::INFINITY))
            .unwrap()
            .is_empty());
        assert!(binseg(&data, m, PenaltySpec::Manual(1e18), 5)
            .unwrap()
            .is_empty());
    }
}

#[test]
fn mbic_matches_unpruned_search() {
    for seed in 0..30 {
        let data = piecewise(60, seed);
        for m in MODELS {
            let p = pelt(&data, m, PenaltySpec::Mbic).unwrap();
            let (obj, cps) = optimal_partitioning(&data, m, PenaltySpec::Mbic);
            assert!((p.objective - obj).abs() < 1e-9, "seed {seed} {m}");
            assert_eq!(p.changepoints, cps);
        }
    }
}

fn series_strategy() -> impl Strategy<Value = Vec<f64>> {
    (8usize..=24, any::<u64>()).prop_map(|(n, seed)| {
        let mut s = Stream::new(seed);
        let cut = (s.next_u64() % n as u64) as usize;
        (0..n)
            .map(|t| {
                let shift = if t >= cut { 2.0 } else { 0.0 };
                (s.normal(shift, 1.0 + shift) * 100.0).round() / 100.0
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pelt_equals_brute_force(data in series_strategy(), beta in prop::sample::select(vec![2.0, 5.0, 12.0, 30.0])) {
        for m in MODELS {
            let pen = PenaltySpec::Manual(beta);
            let p = pelt(&data, m, pen).unwrap();
            let (opt, cps) = optimal_partitioning(&data, m, pen);
            prop_assert!((p.objective - opt).abs() < 1e-9);
            prop_assert_eq!(&p.changepoints, &cps);
            if p.len() <= 4 {
                let o = exact_oracle(&data, m, pen, 4).unwrap();
                prop_assert!((p.objective - o.objective).abs() < 1e-9);
                prop_assert_eq!(&p.changepoints, &o.changepoints);
            }
        }
    }

    #[test]
    fn binseg_never_beats_pelt(data in series_strategy(), q in 1usize..4) {
        for m in MODELS {
            let pen = PenaltySpec::Manual(3.0);
            let b = binseg(&data, m, pen, q).unwrap();
            let p = pelt(&data, m, pen).unwrap();
            prop_assert!(b.objective >= p.objective - 1e-9);
            prop_assert!(b.len() <= q);
        }
    }

    #[test]
    fn more_penalty_fewer_changepoints(data in series_strategy()) {
        for m in MODELS {
            let counts: Vec<usize> = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0]
                .iter()
                .map(|&b| pelt(&data, m, PenaltySpec::Manual(b)).unwrap().len())
                .collect();
            prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{:?}", counts);
        }
    }

    #[test]
    fn shift_and_scale(data in series_strategy(), shift in -50.0f64..50.0, scale in 0.5f64..4.0) {
        let shifted: Vec<f64> = data.iter().map(|x| x + shift).collect();
        let a = pelt(&data, CostModel::MeanVar, PenaltySpec::Bic).unwrap();
        let b = pelt(&shifted, CostModel::MeanVar, PenaltySpec::Bic).unwrap();
        prop_assert!((a.objective - b.objective).abs() < 1e-6 * (1.0 + a.objective.abs()));
        prop_assert_eq!(&a.changepoints, &b.changepoints);
        let scaled: Vec<f64> = data.iter().map(|x| x * scale).collect();
        let c = pelt(&data, CostModel::Mean, PenaltySpec::Manual(3.0)).unwrap();
        let d = pelt(&scaled, CostModel::Mean, PenaltySpec::Manual(3.0 * scale * scale)).unwrap();
        prop_assert!((c.objective * scale * scale - d.objective).abs() < 1e-6 * (1.0 + d.objective.abs()));
        prop_assert_eq!(&c.changepoints, &d.changepoints);
    }

    #[test]
    fn deterministic(data in series_strategy()) {
        let det = Detector::new(CostModel::MeanVar, PenaltySpec::Sic);
        prop_assert_eq!(det.pelt(&data).unwrap(), det.pelt(&data).unwrap());
        prop_assert_eq!(det.binseg(&data, 3).unwrap(), det.binseg(&data, 3).unwrap());
    }
}
