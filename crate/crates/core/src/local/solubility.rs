//! Local solubility of `c_1 y_1^d + .. + c_s y_s^d = 0` over `R` and `Q_p`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, pow_mod, primes_up_to, valuation};
use crate::forms::DiagonalForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Soluble,
    Insoluble,
    /// The search modulus exceeded the configured cap.
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolubilityConfig {
    /// Primes up to this bound are always examined.
    pub prime_cutoff: u64,
    /// Largest modulus `p^γ` searched exhaustively.
    pub modulus_cap: u64,
}

impl Default for SolubilityConfig {
    fn default() -> Self {
        Self {
            prime_cutoff: 100,
            modulus_cap: 5000,
        }
    }
}

impl SolubilityConfig {
    /// `γ = 2(v_p(d) + max_j v_p(c_j)) + 1`. A solution modulo `p^γ` with a
    /// unit coordinate `y_j` lifts by Hensel's lemma in that coordinate.
    pub fn hensel_gamma(&self, form: &DiagonalForm, p: u64) -> u32 {
        let vd = valuation(form.degree() as i128, p);
        let vc = form
            .coeffs()
            .iter()
            .map(|&c| valuation(c as i128, p))
            .max()
            .unwrap_or(0);
        2 * (vd + vc) + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolubilityReport {
    pub real: bool,
    pub positive_real: bool,
    pub p_adic: BTreeMap<u64, Verdict>,
    pub overall: Verdict,
}

/// Whether some `y mod p^γ` with a unit coordinate solves the congruence.
pub fn p_adic_verdict(form: &DiagonalForm, p: u64, config: &SolubilityConfig) -> Verdict {
    let gamma = config.hensel_gamma(form, p);
    let modulus = match p.checked_pow(gamma) {
        Some(m) if m <= config.modulus_cap => m,
        _ => return Verdict::Undetermined,
    };
    let m = modulus as usize;
    let d = form.degree() as u64;
    // reachable[r][flag]: some prefix sums to r, flag = a unit coordinate was used
    let mut reach = vec![[false; 2]; m];
    reach[0][0] = true;
    for &c in form.coeffs() {
        let c_mod = (c as i128).rem_euclid(modulus as i128) as u64;
        let mut values: Vec<(usize, usize)> = (0..modulus)
            .map(|y| {
                let v = (c_mod as u128 * pow_mod(y, d, modulus) as u128 % modulus as u128) as usize;
                (v, usize::from(y % p != 0))
            })
            .collect();
        values.sort_unstable();
        values.dedup();
        let mut next = vec![[false; 2]; m];
        for (r, flags) in reach.iter().enumerate() {
            for (f, &on) in flags.iter().enumerate() {
                if !on {
                    continue;
                }
                for &(v, unit) in &values {
                    next[(r + v) % m][f | unit] = true;
                }
            }
        }
        reach = next;
    }
    if reach[0][1] {
        Verdict::Soluble
    } else {
        Verdict::Insoluble
    }
}

/// Primes examined: all `p ≤ cutoff` and all `p | d·Π c_j`. Only these can
/// obstruct when `s` is large; the set is not claimed to be exhaustive for
/// small `s`.
pub fn solubility_report(form: &DiagonalForm, config: &SolubilityConfig) -> SolubilityReport {
    let positive_real = !form.all_same_sign();
    let real = form.degree() % 2 == 1 || positive_real;
    let mut primes: Vec<u64> = primes_up_to(config.prime_cutoff);
    let mut bad: Vec<u64> = factorize(form.degree() as u64).into_iter().map(|(p, _)| p).collect();
    for &c in form.coeffs() {
        bad.extend(factorize(c.unsigned_abs()).into_iter().map(|(p, _)| p));
    }
    primes.extend(bad);
    primes.sort_unstable();
    primes.dedup();
    let p_adic: BTreeMap<u64, Verdict> = primes
        .into_iter()
        .map(|p| (p, p_adic_verdict(form, p, config)))
        .collect();
    let overall = if !real || p_adic.values().any(|&v| v == Verdict::Insoluble) {
        Verdict::Insoluble
    } else if p_adic.values().any(|&v| v == Verdict::Undetermined) {
        Verdict::Undetermined
    } else {
        Verdict::Soluble
    };
    SolubilityReport {
        real,
        positive_real,
        p_adic,
        overall,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(d: u32, c: &[i64]) -> DiagonalForm {
        DiagonalForm::new(d, 1, c.to_vec()).unwrap()
    }

    #[test]
    fn definite_quadratic_is_insoluble() {
        let r = solubility_report(&form(2, &[1, 1, 1]), &SolubilityConfig::default());
        assert!(!r.real);
        assert_eq!(r.overall, Verdict::Insoluble);
    }

    #[test]
    fn linear_forms_are_soluble() {
        for c in [[1i64, 1, -1], [3, -7, 2], [5, 5, 10]] {
            let f = form(1, &c);
            let r = solubility_report(&f, &SolubilityConfig::default());
            if f.all_same_sign() {
                assert!(!r.positive_real);
            }
            assert!(r.p_adic.values().all(|&v| v == Verdict::Soluble), "{c:?}");
        }
    }

    #[test]
    fn five_variable_quadratic() {
        let r = solubility_report(&form(2, &[1, 1, 1, 1, -1]), &SolubilityConfig::default());
        assert_eq!(r.overall, Verdict::Soluble);
    }

    #[test]
    fn classical_obstructions() {
        let cfg = SolubilityConfig::default();
        // x² + y² = 3z² has no nontrivial 3-adic solution
        assert_eq!(p_adic_verdict(&form(2, &[1, 1, -3]), 3, &cfg), Verdict::Insoluble);
        // x² + y² = 2z² is soluble everywhere
        assert_eq!(solubility_report(&form(2, &[1, 1, -2]), &cfg).overall, Verdict::Soluble);
        // x² = 2y² needs a square root of 2: none in Q_2, one in Q_7
        assert_eq!(p_adic_verdict(&form(2, &[1, -2]), 2, &cfg), Verdict::Insoluble);
        assert_eq!(p_adic_verdict(&form(2, &[1, -2]), 7, &cfg), Verdict::Soluble);
    }

    #[test]
    fn large_valuation_is_undetermined() {
        let f = form(2, &[1, 1 << 20, -3]);
        assert_eq!(p_adic_verdict(&f, 2, &SolubilityConfig::default()), Verdict::Undetermined);
    }
}
