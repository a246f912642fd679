use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::NeumaierSum;
use crate::error::{invalid, Result};
use crate::forms::DiagonalForm;
use crate::weyl::quadrature::integrate;
use crate::weyl::OscillatoryTable;

/// Quadrature panels have dyadic width at most `1/(4 max|c|)`, anchored at 0,
/// so `I⁺(c, x)` does not depend on which cutoff the pass was run for.
const PANELS_PER_UNIT: f64 = 4.0;
const PANEL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularIntegral {
    /// `I⁺(c, W) = ∫_{-W}^{W} Π_j V_k(c_j β) dβ`
    pub truncated: f64,
    /// `I⁺(c, W/2)`
    pub half: f64,
    /// Tail-corrected value assuming a `W^{1-s/d}` tail.
    pub extrapolated: f64,
    /// `|extrapolated − truncated|`
    pub tail_estimate: f64,
    pub w: f64,
}

impl SingularIntegral {
    /// Combine `I⁺(c, W)` and `I⁺(c, W/2)` for `s` terms of degree `d`.
    pub fn from_pair(truncated: f64, half: f64, w: f64, terms: usize, degree: u32) -> Self {
        let ratio = 2f64.powf(1.0 - terms as f64 / degree as f64);
        let extrapolated = if ratio < 1.0 {
            truncated + (truncated - half) * ratio / (1.0 - ratio)
        } else {
            truncated
        };
        Self {
            truncated,
            half,
            extrapolated,
            tail_estimate: (extrapolated - truncated).abs(),
            w,
        }
    }

    pub fn zero(w: f64) -> Self {
        Self {
            truncated: 0.0,
            half: 0.0,
            extrapolated: 0.0,
            tail_estimate: 0.0,
            w,
        }
    }
}

/// Shared evaluator for several coefficient vectors of the same shape.
pub fn integral_table(degree: u32, factors: usize, max_coeff: u64, w: f64) -> Result<OscillatoryTable> {
    OscillatoryTable::new(degree, factors as u32, max_coeff as f64 * w)
}

/// `I⁺(c, W)` by panelwise Gauss–Kronrod on `[0, W]` of `2·Re Π V_k(c_j β)`.
pub fn singular_integral_positive(form: &DiagonalForm, w: f64) -> Result<SingularIntegral> {
    let table = integral_table(form.degree(), form.factors(), form.max_coeff(), w)?;
    singular_integral_with_table(form.coeffs(), &table, w)
}

fn panel_width(coeffs: &[i64]) -> f64 {
    let max_c = coeffs.iter().map(|c| c.unsigned_abs()).max().unwrap_or(1) as f64;
    let m = (PANELS_PER_UNIT * max_c).log2().ceil() as i32;
    2f64.powi(-m)
}

/// `I⁺(c, x)` for each cutoff in `cutoffs` from one left-to-right pass.
pub fn singular_integral_cutoffs(
    coeffs: &[i64],
    table: &OscillatoryTable,
    cutoffs: &[f64],
) -> Result<Vec<f64>> {
    let top = cutoffs.iter().copied().fold(0.0, f64::max);
    let h = panel_width(coeffs);
    let integrand = |beta: f64| -> Complex64 {
        let mut prod = Complex64::new(1.0, 0.0);
        for &c in coeffs {
            prod *= table.eval(c as f64 * beta).expect("β within table range");
        }
        Complex64::new(2.0 * prod.re, 0.0)
    };
    let panel = |a: f64, b: f64| -> Result<f64> {
        integrate(integrand, a, b, PANEL_TOL, 200).map(|e| e.value.re)
    };
    let full = (top / h).floor() as usize;
    let pieces: Vec<f64> = (0..full)
        .into_par_iter()
        .map(|i| panel(i as f64 * h, (i + 1) as f64 * h))
        .collect::<Result<_>>()?;
    let mut prefix = Vec::with_capacity(full + 1);
    let mut run = NeumaierSum::default();
    prefix.push(run);
    for &p in &pieces {
        run.add(p);
        prefix.push(run);
    }
    cutoffs
        .iter()
        .map(|&x| {
            let n = ((x / h).floor() as usize).min(full);
            let mut acc = prefix[n];
            let start = n as f64 * h;
            if x > start {
                acc.add(panel(start, x)?);
            }
            Ok(acc.value())
        })
        .collect()
}

pub fn singular_integral_with_table(
    coeffs: &[i64],
    table: &OscillatoryTable,
    w: f64,
) -> Result<SingularIntegral> {
    if !(w >= 3.0) || !w.is_finite() {
        return invalid("integral cutoff must be finite and at least 3");
    }
    let d = table.degree();
    let s = coeffs.len();
    if s <= 2 * d as usize {
        log::warn!("s ≤ 2d: the singular integral converges only conditionally");
    }
    let vals = singular_integral_cutoffs(coeffs, table, &[w, w / 2.0])?;
    Ok(SingularIntegral::from_pair(vals[0], vals[1], w, s, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(d: u32, k: usize, c: &[i64]) -> DiagonalForm {
        DiagonalForm::new(d, k, c.to_vec()).unwrap()
    }

    #[test]
    fn linear_pair_examples() {
        let i = singular_integral_positive(&form(1, 1, &[1, -1]), 4096.0).unwrap();
        assert!((i.extrapolated - 1.0).abs() < 1e-5, "{i:?}");
        assert!((i.truncated - 1.0).abs() < 1e-4);
        let j = singular_integral_positive(&form(1, 1, &[1, 1]), 4096.0).unwrap();
        assert!(j.extrapolated.abs() < 1e-5, "{j:?}");
    }

    #[test]
    fn scaling_law() {
        let a = singular_integral_positive(&form(1, 1, &[1, 1, -2]), 1024.0).unwrap();
        let b = singular_integral_positive(&form(1, 1, &[2, 2, -4]), 1024.0).unwrap();
        assert!((a.extrapolated - 0.5).abs() < 1e-6);
        assert!((b.extrapolated - 0.25).abs() < 1e-6);
    }

    #[test]
    fn rejects_short_range() {
        assert!(singular_integral_positive(&form(1, 1, &[1, -1]), 1.0).is_err());
    }
}
