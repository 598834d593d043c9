// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::SegmentCost;

struct Candidate {
    start: usize,
    /// First end index at which the candidate is no longer admissible.
    expires: Option<usize>,
}

/// PELT over half-open prefixes: `F(t) = min_s F(s) + C'(s, t) + beta`.
///
/// A candidate `s` is pruned once `F(s) + C'(s, t) + K > F(t)`, where `K`
/// bounds how much a split can lower the cost (`0` for plain likelihood
/// costs, `ln(4 / n)` with the MBIC length term). With a minimum segment
/// length `m` the pruned candidate stays available for ends before `t + m`,
/// since `t` cannot yet close a segment there.
pub(super) fn search(cost: &SegmentCost, beta: f64) -> Vec<usize> {
    let n = cost.len();
    let min = cost.min_len();
    if beta.is_infinite() {
        return Vec::new();
    }
    let slack = if cost.augments() {
        (4.0 / n as f64).ln().min(0.0)
    } else {
        0.0
    };
    let mut f = vec![f64::INFINITY; n + 1];
    let mut last = vec![0usize; n + 1];
    f[0] = -beta;
    let mut candidates = vec![Candidate {
        start: 0,
        expires: None,
    }];
    for t in 1..=n {
        candidates.retain(|c| c.expires.map_or(true, |e| t < e));
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for c in &candidates {
            if t - c.start < min {
                continue;
            }
            let v = f[c.start] + cost.cost(c.start, t) + beta;
            if v < best {
                best = v;
                arg = c.start;
            }
        }
        f[t] = best;
        last[t] = arg;
        if best.is_finite() {
            for c in candidates.iter_mut() {
                if t - c.start < min || c.expires.is_some() {
                    continue;
                }
                if f[c.start] + cost.cost(c.start, t) + slack > best {
                    c.expires = Some(t + min);
                }
            }
            candidates.push(Candidate {
                start: t,
                expires: None,
            });
        }
    }
    let mut cps = Vec::new();
    let mut t = n;
    while t > 0 {
        let s = last[t];
        if s > 0 {
            cps.push(s - 1);
        }
        t = s;
    }
    cps.reverse();
    cps
}

#[cfg(test)]
mod tests {
    use super::super::{exact_oracle, pelt, CostModel, PenaltySpec};

    #[test]
    fn infinite_penalty_gives_single_segment() {
        let data = [0.0, 5.0, 0.0, 5.0, 0.0, 5.0];
        let seg = pelt(
            &data,
            CostModel::MeanVar,
            PenaltySpec::Manual(f64::INFINITY),
        )
        .unwrap();
        assert!(seg.is_empty());
        assert_eq!(seg.segments.len(), 1);
    }

    #[test]
    fn small_step_matches_hand_enumeration() {
        let seg = pelt(
            &[0.0, 0.0, 10.0, 10.0],
            CostModel::Mean,
            PenaltySpec::Manual(1.0),
        )
        .unwrap();
        assert_eq!(seg.changepoints, [1]);
        assert_eq!(seg.objective, 1.0);
    }

    #[test]
    fn mbic_pruning_stays_exact() {
        let data = [
            1.0, 1.4, 0.7, 1.1, 6.0, 3.5, 9.0, 0.2, 4.4, 1.2, 1.0, 0.9, 1.3, 1.1, 7.5, -3.0, 8.0,
            -2.0, 1.0, 1.1,
        ];
        for model in [CostModel::Mean, CostModel::Variance, CostModel::MeanVar] {
            let p = pelt(&data, model, PenaltySpec::Mbic).unwrap();
            let o = exact_oracle(&data, model, PenaltySpec::Mbic, 19).unwrap();
            assert!((p.objective - o.objective).abs() < 1e-9, "{model}");
            assert_eq!(p.changepoints, o.changepoints, "{model}");
        }
    }
}
