// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::vec::Vec;

use super::SegmentCost;
use crate::{Error, Result};

/// Longest series accepted by the exhaustive search.
pub const MAX_LEN: usize = 40;

/// Upper bound on enumerated segmentations.
const MAX_ENUMERATED: f64 = 1.0e8;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

struct Search {
    costs: Vec<Vec<f64>>,
    min: usize,
    n: usize,
    beta: f64,
    max_k: usize,
    path: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search {
    fn visit(&mut self, start: usize, acc: f64) {
        for end in start + self.min..=self.n {
            let total = acc + self.costs[start][end];
            if end == self.n {
                let k = self.path.len();
                let objective = if k == 0 {
                    total
                } else {
                    total + k as f64 * self.beta
                };
                if self.best.as_ref().map_or(true, |(b, _)| objective < *b) {
                    self.best = Some((objective, self.path.clone()));
                }
            } else if self.path.len() < self.max_k && self.n - end >= self.min {
                self.path.push(end - 1);
                self.visit(end, total);
                self.path.pop();
            }
        }
    }
}

/// Enumerates every admissible segmentation with at most `max_k` changepoints.
pub(super) fn search(cost: &SegmentCost, beta: f64, max_k: usize) -> Result<Vec<usize>> {
    let n = cost.len();
    let min = cost.min_len();
    let max_k = max_k.min(n / min - 1);
    let count: f64 = (0..=max_k).map(|k| binomial(n - 1, k)).sum();
    if count > MAX_ENUMERATED {
        return Err(Error::param(alloc::format!(
            "exhaustive search over ~{count:.3e} segmentations; lower max_k"
        )));
    }
    let costs: Vec<Vec<f64>> = (0..=n)
        .map(|a| {
            (0..=n)
                .map(|b| {
                    if b >= a + min {
                        cost.cost(a, b)
                    } else {
                        f64::INFINITY
                    }
                })
                .collect()
        })
        .collect();
    let mut s = Search {
        costs,
        min,
        n,
        beta,
        max_k,
        path: Vec::new(),
        best: None,
    };
    s.visit(0, 0.0);
    Ok(s.best.map(|(_, p)| p).unwrap_or_default())
}
