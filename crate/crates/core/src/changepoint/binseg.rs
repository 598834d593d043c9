// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::vec::Vec;

use super::SegmentCost;

/// Best single split of `[a, b)`: `(gain, s)` where `s` opens the right part.
fn best_split(cost: &SegmentCost, a: usize, b: usize) -> Option<(f64, usize)> {
    let min = cost.min_len();
    if b - a < 2 * min {
        return None;
    }
    let whole = cost.cost(a, b);
    let mut best: Option<(f64, usize)> = None;
    for s in a + min..=b - min {
        let gain = whole - cost.cost(a, s) - cost.cost(s, b);
        if best.map_or(true, |(g, _)| gain > g) {
            best = Some((gain, s));
        }
    }
    best
}

/// Returns sorted changepoints (last index of each segment but the final one).
pub(super) fn search(cost: &SegmentCost, beta: f64, q_max: usize) -> Vec<usize> {
    // (a, b, cached best split)
    type Open = (usize, usize, Option<(f64, usize)>);
    let mut segments: Vec<Open> = alloc::vec![(0, cost.len(), best_split(cost, 0, cost.len()))];
    let mut splits = Vec::new();
    while splits.len() < q_max {
        let mut pick: Option<(usize, f64, usize)> = None;
        for (i, &(_, _, best)) in segments.iter().enumerate() {
            if let Some((gain, s)) = best {
                let better = match pick {
                    None => true,
                    Some((_, g, ps)) => gain > g || (gain == g && s < ps),
                };
                if better {
                    pick = Some((i, gain, s));
                }
            }
        }
        let Some((i, gain, s)) = pick else { break };
        // NaN gains never split
        if gain.partial_cmp(&beta) != Some(core::cmp::Ordering::Greater) {
            break;
        }
        let (a, b, _) = segments[i];
        segments[i] = (a, s, best_split(cost, a, s));
        segments.insert(i + 1, (s, b, best_split(cost, s, b)));
        splits.push(s - 1);
    }
    splits.sort_unstable();
    splits
}

#[cfg(test)]
mod tests {
    use super::super::{binseg, pelt, CostModel, PenaltySpec};

    #[test]
    fn constant_series_has_no_changepoints() {
        let data = [3.0; 20];
        for model in [CostModel::Mean, CostModel::MeanVar, CostModel::Variance] {
            let seg = binseg(&data, model, PenaltySpec::Manual(1e-6), 5).unwrap();
            assert!(seg.is_empty(), "{model}");
        }
    }

    #[test]
    fn two_level_step_is_found() {
        let mut data = [0.0; 12];
        for (i, x) in data.iter_mut().enumerate() {
            *x = if i < 5 {
                (i % 2) as f64 * 0.1
            } else {
                8.0 + (i % 3) as f64 * 0.1
            };
        }
        let seg = binseg(&data, CostModel::Mean, PenaltySpec::Bic, 2).unwrap();
        assert_eq!(seg.changepoints, [4]);
    }

    #[test]
    fn respects_q_max_and_bounds_pelt() {
        let data = [0.0, 0.1, 5.0, 5.1, 0.0, 0.2, 5.0, 5.2, 0.1, 0.0];
        let seg = binseg(&data, CostModel::Mean, PenaltySpec::Manual(0.5), 2).unwrap();
        assert!(seg.len() <= 2);
        let exact = pelt(&data, CostModel::Mean, PenaltySpec::Manual(0.5)).unwrap();
        assert!(seg.objective >= exact.objective - 1e-9);
    }

    #[test]
    fn infinite_penalty_rejects_all_splits() {
        let data = [0.0, 0.0, 9.0, 9.0, 0.0, 0.0];
        let seg = binseg(
            &data,
            CostModel::Mean,
            PenaltySpec::Manual(f64::INFINITY),
            3,
        )
        .unwrap();
        assert!(seg.is_empty());
        assert!(seg.objective.is_finite());
    }
}
