use num_bigint::BigUint;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, NeumaierSum};
use crate::error::{invalid, Error, Result};
use crate::forms::DiagonalForm;
use crate::weyl::{complete_sum_spectrum, power_residues, units};

/// `T_c(q) = q^{-ks} Σ_{(a,q)=1} Π_j S_k(q, a c_j)`.
pub fn t_term(form: &DiagonalForm, q: u64) -> Result<f64> {
    if q == 0 {
        return invalid("modulus must be positive");
    }
    if q == 1 {
        return Ok(1.0);
    }
    let k = form.factors();
    let spectrum = complete_sum_spectrum(q, form.degree(), k)?;
    let norm = (q as f64).powi(k as i32);
    let qi = q as i128;
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    let mut scale = 0.0;
    for a in units(q) {
        let mut prod = Complex64::new(1.0, 0.0);
        for &c in form.coeffs() {
            let b = (a as i128 * c as i128).rem_euclid(qi) as usize;
            prod *= spectrum[b] / norm;
        }
        re.add(prod.re);
        im.add(prod.im);
        scale += prod.norm();
    }
    if im.value().abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::Consistency(format!(
            "T_c({q}) has imaginary part {:e}",
            im.value()
        )));
    }
    Ok(re.value())
}

/// `𝔖(c, W) = Σ_{q ≤ W} T_c(q)` with the individual terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEstimate {
    pub w: u64,
    pub value: f64,
    /// `max_{W/2 < u ≤ W} |Σ_{W/2 < q ≤ u} T_c(q)|`
    pub tail_indicator: f64,
    pub terms: Vec<f64>,
}

impl SeriesEstimate {
    /// Partial sum up to `w ≤ self.w`.
    pub fn partial(&self, w: u64) -> f64 {
        let upto = (w.min(self.w)) as usize;
        self.terms[..upto].iter().copied().collect::<NeumaierSum>().value()
    }
}

pub fn truncated_singular_series(form: &DiagonalForm, w: u64) -> Result<SeriesEstimate> {
    if w == 0 {
        return invalid("series cutoff must be positive");
    }
    if form.terms() <= 2 * form.degree() as usize {
        log::warn!("s ≤ 2d: the singular series need not converge absolutely");
    }
    let terms: Vec<f64> = (1..=w)
        .into_par_iter()
        .map(|q| t_term(form, q))
        .collect::<Result<_>>()?;
    let value = terms.iter().copied().collect::<NeumaierSum>().value();
    let mut tail = 0.0f64;
    let mut run = NeumaierSum::default();
    for &t in &terms[(w / 2) as usize..] {
        run.add(t);
        tail = tail.max(run.value().abs());
    }
    Ok(SeriesEstimate {
        w,
        value,
        tail_indicator: tail,
        terms,
    })
}

/// `Φ_c(q)`: solutions of `Σ c_j ⟨x_j⟩^d ≡ 0 mod q` with `x_j ∈ (Z/qZ)^k`.
pub fn congruence_count(form: &DiagonalForm, q: u64) -> Result<BigUint> {
    if q == 0 {
        return invalid("modulus must be positive");
    }
    let qu = q as usize;
    let dist = power_residues(q, form.degree(), form.factors())?;
    let scaled = |c: i64| -> Vec<u128> {
        let mut out = vec![0u128; qu];
        for (r, &n) in dist.iter().enumerate() {
            let idx = (c as i128 * r as i128).rem_euclid(q as i128) as usize;
            out[idx] += n;
        }
        out
    };
    let coeffs = form.coeffs();
    let mut acc = scaled(coeffs[0]);
    for &c in &coeffs[1..coeffs.len() - 1] {
        let next = scaled(c);
        let mut conv = vec![0u128; qu];
        for (r, &a) in acc.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (t, &b) in next.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let slot = &mut conv[(r + t) % qu];
                *slot = a
                    .checked_mul(b)
                    .and_then(|v| slot.checked_add(v))
                    .ok_or(Error::Overflow("congruence count"))?;
            }
        }
        acc = conv;
    }
    let last = scaled(coeffs[coeffs.len() - 1]);
    let mut total: u128 = 0;
    for (r, &a) in acc.iter().enumerate() {
        let b = last[(qu - r) % qu];
        total = a
            .checked_mul(b)
            .and_then(|v| total.checked_add(v))
            .ok_or(Error::Overflow("congruence count"))?;
    }
    Ok(BigUint::from(total))
}

/// Largest modulus used for `Φ_c(p^L)`.
pub const EULER_MODULUS_CAP: u64 = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerFactor {
    pub p: u64,
    /// `p^{L(1-ks)} Φ_c(p^L)`
    pub value: f64,
    /// `Σ_{l ≤ L} T_c(p^l)`
    pub series_check: f64,
    pub level: u32,
    /// Last two levels agree to `1e-8` relative.
    pub stabilized: bool,
}

/// `E_p(c)` from the congruence count at the largest `L ≤ l_max` with
/// `p^L ≤ EULER_MODULUS_CAP`, checked against the partial sum of `T_c(p^l)`.
pub fn euler_factor(form: &DiagonalForm, p: u64, l_max: u32) -> Result<EulerFactor> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    let ks = (form.factors() * form.terms()) as f64;
    let mut level = 0;
    let mut value = 1.0;
    let mut prev = f64::NAN;
    let mut series = NeumaierSum::default();
    series.add(1.0);
    let mut q = 1u64;
    while level < l_max {
        let next_q = match q.checked_mul(p) {
            Some(v) if v <= EULER_MODULUS_CAP => v,
            _ => break,
        };
        q = next_q;
        level += 1;
        let phi = congruence_count(form, q)?;
        let v = ((q as f64).ln() * (1.0 - ks)).exp() * biguint_to_f64(&phi);
        series.add(t_term(form, q)?);
        let check = series.value();
        if (v - check).abs() > 1e-9 * v.abs().max(1.0) {
            return Err(Error::Consistency(format!(
                "E_{p} at level {level}: congruence route {v} vs series route {check}"
            )));
        }
        prev = value;
        value = v;
    }
    let stabilized = level > 0 && (value - prev).abs() <= 1e-8 * value.abs().max(1e-300);
    Ok(EulerFactor {
        p,
        value,
        series_check: series.value(),
        level,
        stabilized,
    })
}

pub(crate) fn biguint_to_f64(n: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    n.to_f64().unwrap_or(f64::INFINITY)
}
