use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::integral::{integral_table, singular_integral_cutoffs, SingularIntegral};
use super::series::{biguint_to_f64, congruence_count, t_term, truncated_singular_series, EulerFactor, EULER_MODULUS_CAP};
use super::solubility::{solubility_report, SolubilityConfig, SolubilityReport};
use crate::arith::{factorial, is_prime, primes_up_to, zeta, NeumaierSum};
use crate::error::{invalid, Error, Result};
use crate::forms::{DiagonalForm, Variety};
use crate::weyl::OscillatoryTable;

/// Cutoffs for the series, the Euler factors and the singular integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    pub w_series: u64,
    pub l_max: u32,
    pub w_integral: f64,
    pub prime_cutoff: u64,
}

impl Default for TruncationParams {
    fn default() -> Self {
        Self {
            w_series: 4096,
            l_max: 8,
            w_integral: 16384.0,
            prime_cutoff: 100,
        }
    }
}

impl TruncationParams {
    pub fn validate(&self) -> Result<()> {
        if self.w_series == 0 || self.prime_cutoff < 2 {
            return invalid("series cutoff and prime cutoff must be positive");
        }
        if !(self.w_integral >= 3.0) || !self.w_integral.is_finite() {
            return invalid("integral cutoff must be finite and at least 3");
        }
        Ok(())
    }
}

/// Store for congruence counts and truncated singular integrals.
///
/// Values are pure functions of their keys, so a hit returns exactly what a
/// fresh computation would.
pub trait DensityCache: Sync {
    fn phi(&self, _form: &str, _q: u64) -> Option<BigUint> {
        None
    }
    fn store_phi(&self, _form: &str, _q: u64, _count: &BigUint) {}
    fn integral(&self, _form: &str, _w: f64) -> Option<f64> {
        None
    }
    fn store_integral(&self, _form: &str, _w: f64, _value: f64) {}
}

/// Cache that never hits.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCache;

impl DensityCache for NoCache {}

/// First 16 hex digits of SHA-256 over a canonical rendering of the form.
pub fn form_hash(form: &DiagonalForm) -> String {
    let coeffs: Vec<String> = form.coeffs().iter().map(|c| c.to_string()).collect();
    let canon = format!("d={};k={};c={}", form.degree(), form.factors(), coeffs.join(","));
    let digest = Sha256::digest(canon.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Smallest even `n_0(d)` currently known to work (exact for `d ≤ 2`).
pub fn n0(degree: u32) -> Option<u32> {
    match degree {
        1 => Some(2),
        2 => Some(4),
        3 => Some(8),
        4 => Some(16),
        5 => Some(28),
        6 => Some(44),
        _ => None,
    }
}

fn congruence_count_cached(form: &DiagonalForm, q: u64, cache: &dyn DensityCache) -> Result<BigUint> {
    let key = form_hash(form);
    if let Some(v) = cache.phi(&key, q) {
        return Ok(v);
    }
    let v = congruence_count(form, q)?;
    cache.store_phi(&key, q, &v);
    Ok(v)
}

/// [`super::euler_factor`] with congruence counts routed through a cache.
pub fn euler_factor_cached(
    form: &DiagonalForm,
    p: u64,
    l_max: u32,
    cache: &dyn DensityCache,
) -> Result<EulerFactor> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    let ks = (form.factors() * form.terms()) as f64;
    let (mut level, mut value, mut prev, mut q) = (0u32, 1.0, f64::NAN, 1u64);
    let mut series = NeumaierSum::default();
    series.add(1.0);
    while level < l_max {
        q = match q.checked_mul(p) {
            Some(v) if v <= EULER_MODULUS_CAP => v,
            _ => break,
        };
        level += 1;
        let phi = congruence_count_cached(form, q, cache)?;
        let v = ((q as f64).ln() * (1.0 - ks)).exp() * biguint_to_f64(&phi);
        series.add(t_term(form, q)?);
        if (v - series.value()).abs() > 1e-9 * v.abs().max(1.0) {
            return Err(Error::Consistency(format!(
                "E_{p} at level {level}: congruence route {v} vs series route {}",
                series.value()
            )));
        }
        prev = value;
        value = v;
    }
    Ok(EulerFactor {
        p,
        value,
        series_check: series.value(),
        level,
        stabilized: level > 0 && (value - prev).abs() <= 1e-8 * value.abs().max(1e-300),
    })
}

fn integral_cached(
    coeffs: &[i64],
    form: &DiagonalForm,
    table: &OscillatoryTable,
    w: f64,
    cache: &dyn DensityCache,
) -> Result<SingularIntegral> {
    let shaped = DiagonalForm::new(form.degree(), form.factors(), coeffs.to_vec())?;
    if shaped.all_same_sign() {
        return Ok(SingularIntegral::zero(w));
    }
    let key = form_hash(&shaped);
    let cutoffs = [w, w / 2.0];
    let cached: Vec<Option<f64>> = cutoffs.iter().map(|&x| cache.integral(&key, x)).collect();
    let values: Vec<f64> = if cached.iter().all(Option::is_some) {
        cached.into_iter().map(Option::unwrap).collect()
    } else {
        let fresh = singular_integral_cutoffs(coeffs, table, &cutoffs)?;
        for (&x, &v) in cutoffs.iter().zip(&fresh) {
            cache.store_integral(&key, x, v);
        }
        fresh
    };
    Ok(SingularIntegral::from_pair(
        values[0],
        values[1],
        w,
        coeffs.len(),
        form.degree(),
    ))
}

/// Canonical representative of `ηc` under term permutations and `c → −c`.
fn sign_class(coeffs: &[i64]) -> Vec<i64> {
    let mut a = coeffs.to_vec();
    a.sort_unstable();
    let mut b: Vec<i64> = coeffs.iter().map(|c| -c).collect();
    b.sort_unstable();
    a.min(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub form: DiagonalForm,
    /// `𝔖(c, W)`
    pub sigma_series: f64,
    pub sigma_tail: f64,
    pub euler_factors: Vec<EulerFactor>,
    /// `Π_{p ≤ cutoff} E_p`, a cross-check on `sigma_series`.
    pub euler_product: f64,
    pub i_plus: SingularIntegral,
    /// `Σ_η I⁺(ηc)` over all sign vectors (odd `d` only, else `None`).
    pub sign_sum: Option<f64>,
    /// Operational `I(c)`: `2^{ks} I⁺(c)` for even `d`,
    /// `2^{(k−1)s} Σ_η I⁺(ηc)` for odd `d`.
    pub i_full: f64,
    /// `I(c)` with the printed factor `2^k Σ_η I⁺(ηc)` for odd `d`.
    pub i_printed: f64,
    pub e_plus: f64,
    pub e_full: f64,
    pub e_plus_error: f64,
    pub e_full_error: f64,
    pub solubility: SolubilityReport,
    pub truncation: TruncationParams,
    pub warnings: Vec<String>,
}

pub fn assemble_density(form: &DiagonalForm, params: &TruncationParams) -> Result<DensityReport> {
    assemble_density_cached(form, params, &NoCache)
}

pub fn assemble_density_cached(
    form: &DiagonalForm,
    params: &TruncationParams,
    cache: &dyn DensityCache,
) -> Result<DensityReport> {
    params.validate()?;
    let (d, k, s) = (form.degree(), form.factors(), form.terms());
    let mut warnings = Vec::new();
    let needed = n0(d).map_or(2 * d as usize, |n| n.max(2 * d) as usize);
    if s <= needed {
        warnings.push(format!(
            "s = {s} does not exceed max(2d, n0(d)) = {needed}; asymptotic claims not covered"
        ));
    }
    let solubility = solubility_report(
        form,
        &SolubilityConfig {
            prime_cutoff: params.prime_cutoff,
            ..SolubilityConfig::default()
        },
    );
    let series = truncated_singular_series(form, params.w_series)?;
    let euler_factors: Vec<EulerFactor> = primes_up_to(params.prime_cutoff)
        .into_iter()
        .map(|p| euler_factor_cached(form, p, params.l_max, cache))
        .collect::<Result<_>>()?;
    let euler_product = euler_factors.iter().map(|e| e.value).product();

    let w = params.w_integral;
    let table = integral_table(d, k, form.max_coeff(), w)?;
    let i_plus = integral_cached(form.coeffs(), form, &table, w, cache)?;
    let sigma = series.value;
    let e_plus = sigma * i_plus.extrapolated;
    let e_plus_error = sigma.abs() * i_plus.tail_estimate + i_plus.extrapolated.abs() * series.tail_indicator;

    let (sign_sum, i_full, i_printed, i_err) = if d % 2 == 0 {
        let f = 2f64.powi((k * s) as i32);
        (None, f * i_plus.extrapolated, f * i_plus.extrapolated, f * i_plus.tail_estimate)
    } else {
        let mut classes: BTreeMap<Vec<i64>, SingularIntegral> = BTreeMap::new();
        let mut total = NeumaierSum::default();
        let mut err = 0.0;
        for mask in 0u32..(1 << s) {
            let signed: Vec<i64> = form
                .coeffs()
                .iter()
                .enumerate()
                .map(|(j, &c)| if mask >> j & 1 == 1 { -c } else { c })
                .collect();
            let class = sign_class(&signed);
            if !classes.contains_key(&class) {
                let v = integral_cached(&class, form, &table, w, cache)?;
                classes.insert(class.clone(), v);
            }
            let v = &classes[&class];
            total.add(v.extrapolated);
            err += v.tail_estimate;
        }
        let sum = total.value();
        let full = 2f64.powi(((k - 1) * s) as i32);
        let printed = 2f64.powi(k as i32);
        (Some(sum), full * sum, printed * sum, full * err)
    };
    let e_full = sigma * i_full;
    let e_full_error = sigma.abs() * i_err + i_full.abs() * series.tail_indicator;
    let tol = 1e-6 + 10.0 * e_full_error;
    if e_full < -tol || e_plus < -tol {
        return Err(Error::Consistency(format!(
            "negative density: E+ = {e_plus}, E = {e_full}"
        )));
    }
    Ok(DensityReport {
        form: form.clone(),
        sigma_series: sigma,
        sigma_tail: series.tail_indicator,
        euler_factors,
        euler_product,
        i_plus,
        sign_sum,
        i_full,
        i_printed,
        e_plus,
        e_full,
        e_plus_error,
        e_full_error,
        solubility,
        truncation: *params,
        warnings,
    })
}

/// Leading constant of `N(B) ~ C B (log B)^{k−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    /// `𝔈(a) / (2^k (k−1)! ζ(n+1−d)^k)` with the operational `I(a)`.
    pub chain: f64,
    /// The same quotient with `I(a)` taken in the printed normalization.
    pub printed: f64,
    pub zeta: f64,
    pub density: DensityReport,
    pub warnings: Vec<String>,
}

pub fn predicted_constant(variety: &Variety, params: &TruncationParams) -> Result<ConstantReport> {
    predicted_constant_cached(variety, params, &NoCache)
}

pub fn predicted_constant_cached(
    variety: &Variety,
    params: &TruncationParams,
    cache: &dyn DensityCache,
) -> Result<ConstantReport> {
    let alpha = variety.alpha();
    if alpha <= 1 {
        return invalid(format!("ζ(n+1−d) needs n+1−d > 1, got {alpha}"));
    }
    let form = variety.form();
    let mut warnings = Vec::new();
    if let Some(n0) = n0(form.degree()) {
        if (variety.n() as u32) < n0 {
            warnings.push(format!("n = {} is below n0(d) = {n0}", variety.n()));
        }
    } else {
        warnings.push(format!("no n0 record for d = {}", form.degree()));
    }
    let density = assemble_density_cached(form, params, cache)?;
    let k = form.factors();
    let z = zeta(alpha as f64);
    let denom = 2f64.powi(k as i32) * factorial(k as u32 - 1) * z.powi(k as i32);
    Ok(ConstantReport {
        chain: density.e_full / denom,
        printed: density.sigma_series * density.i_printed / denom,
        zeta: z,
        density,
        warnings,
    })
}
