// SPDX-License-Identifier: MIT OR Apache-2.0

//! Householder QR least squares.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Relative threshold on a Householder pivot below which a column is
/// treated as linearly dependent on its predecessors.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// Diagonal of `(X'X)^-1`.
    pub xtx_inv_diag: Vec<f64>,
}

/// Index of the first column that is (numerically) dependent on earlier ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankDeficient(pub usize);

/// Solves `min ||y - X beta||` for column-major `cols` (each of length `y.len()`).
pub fn least_squares(cols: &[&[f64]], y: &[f64]) -> Result<LeastSquares, RankDeficient> {
    let m = y.len();
    let k = cols.len();
    debug_assert!(cols.iter().all(|c| c.len() == m));
    if k > m {
        return Err(RankDeficient(m));
    }
    let mut a: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
    let mut qty = y.to_vec();
    let scale = a
        .iter()
        .map(|c| norm(c))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; k * k];

    for j in 0..k {
        let alpha = {
            let x = &a[j][j..];
            let nx = norm(x);
            if nx <= RANK_TOL * scale {
                return Err(RankDeficient(j));
            }
            if x[0] > 0.0 {
                -nx
            } else {
                nx
            }
        };
        // v = x - alpha e1, reflector H = I - 2 v v' / (v'v)
        let mut v = a[j][j..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        let reflect = |c: &mut [f64]| {
            let dot: f64 = v.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vtv;
            for (ci, vi) in c.iter_mut().zip(&v) {
                *ci -= f * vi;
            }
        };
        for col in a.iter_mut().skip(j + 1) {
            reflect(&mut col[j..]);
        }
        reflect(&mut qty[j..]);
        r[j * k + j] = alpha;
        for (l, col) in a.iter().enumerate().skip(j + 1) {
            r[j * k + l] = col[j];
        }
    }

    let mut beta = vec![0.0; k];
    for j in (0..k).rev() {
        let s: f64 = ((j + 1)..k).map(|l| r[j * k + l] * beta[l]).sum();
        beta[j] = (qty[j] - s) / r[j * k + j];
    }

    // R^-1 (upper triangular) row by row; diag of (X'X)^-1 = row norms of R^-1.
    let mut rinv = vec![0.0; k * k];
    for col in 0..k {
        rinv[col * k + col] = 1.0 / r[col * k + col];
        for row in (0..col).rev() {
            let s: f64 = ((row + 1)..=col)
                .map(|l| r[row * k + l] * rinv[l * k + col])
                .sum();
            rinv[row * k + col] = -s / r[row * k + row];
        }
    }
    let xtx_inv_diag = (0..k)
        .map(|row| (row..k).map(|c| rinv[row * k + c].powi(2)).sum())
        .collect();

    let residuals: Vec<f64> = (0..m)
        .map(|i| y[i] - cols.iter().zip(&beta).map(|(c, b)| c[i] * b).sum::<f64>())
        .collect();
    let rss = residuals.iter().map(|e| e * e).sum();
    Ok(LeastSquares {
        beta,
        residuals,
        rss,
        xtx_inv_diag,
    })
}

fn norm(x: &[f64]) -> f64 {
    // Scaled to avoid overflow on large counts.
    let big = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if big == 0.0 || !big.is_finite() {
        return big;
    }
    big * x.iter().map(|v| (v / big).powi(2)).sum::<f64>().sqrt()
}
