use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::arith::factorial;
use crate::error::{invalid, Error, Result};

/// Conditioning limit for the scaled design matrix.
const MAX_CONDITION: f64 = 1e10;

/// Least-squares model `Υ(N)/N^α ≈ P(log N)` with `deg P ≤ k−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticModel {
    pub alpha: f64,
    /// Coefficients of `P`, highest degree first.
    pub coefficients: Vec<f64>,
    pub leading: f64,
    /// `leading · (k−1)! / α^{k−1}`
    pub c_h: f64,
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
    pub condition: f64,
}

impl AsymptoticModel {
    /// `N^α P(log N)`.
    pub fn eval(&self, n: f64) -> f64 {
        let l = n.ln();
        let p = self.coefficients.iter().fold(0.0, |acc, c| acc * l + c);
        n.powf(self.alpha) * p
    }
}

pub fn asymptotic_fit(samples: &[(f64, f64)], alpha: f64, k: u32) -> Result<AsymptoticModel> {
    let cols = k as usize;
    if k == 0 {
        return invalid("k must be at least 1");
    }
    if samples.len() < cols + 1 {
        return invalid(format!("need at least {} samples, got {}", cols + 1, samples.len()));
    }
    if samples.iter().any(|&(n, v)| !(n > 1.0) || !v.is_finite()) {
        return invalid("samples need N > 1 and finite values");
    }
    let mut ns: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return invalid("sample scales must be distinct");
    }
    if ns[ns.len() - 1] < 10.0 * ns[0] {
        return invalid("samples must span at least one decade");
    }
    // centre and scale log N so the Vandermonde columns stay comparable
    let logs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let mid = 0.5 * (logs.iter().cloned().fold(f64::INFINITY, f64::min) + logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let half = (logs.iter().map(|l| (l - mid).abs()).fold(0.0, f64::max)).max(1e-300);
    let rows = samples.len();
    let design = DMatrix::from_fn(rows, cols, |r, c| ((logs[r] - mid) / half).powi((cols - 1 - c) as i32));
    let rhs = DVector::from_iterator(rows, samples.iter().map(|&(n, v)| v / n.powf(alpha)));
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Fit(format!("condition number {condition:.3e}; samples too clustered")));
    }
    let scaled = svd
        .solve(&rhs, 1e-14 * smax)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let residuals: Vec<f64> = (&design * &scaled - &rhs).iter().copied().collect();
    let residual_norm = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    // expand Σ b_c ((L − mid)/half)^{e} back into powers of L
    let mut coeffs = vec![0.0; cols];
    for c in 0..cols {
        let e = cols - 1 - c;
        let b = scaled[c] / half.powi(e as i32);
        for i in 0..=e {
            // (L − mid)^e = Σ_i C(e,i) L^i (−mid)^{e−i}
            let binom = factorial(e as u32) / (factorial(i as u32) * factorial((e - i) as u32));
            coeffs[cols - 1 - i] += b * binom * (-mid).powi((e - i) as i32);
        }
    }
    let leading = coeffs[0];
    Ok(AsymptoticModel {
        alpha,
        c_h: leading * factorial(k - 1) / alpha.powi(k as i32 - 1),
        coefficients: coeffs,
        leading,
        residuals,
        residual_norm,
        condition,
    })
}

/// `count` log-spaced integers from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<u64> {
    if count < 2 {
        return vec![lo.round() as u64];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<u64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as u64)
        .collect();
    out.dedup();
    out
}
