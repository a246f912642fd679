use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Float, One, ToPrimitive, Zero};
use rustfft::{FftDirection, FftPlanner};

use crate::arith::{e, e_frac, factorize, gcd_u64, pow_mod, ComplexSum};
use crate::error::{invalid, Error, Result};
use crate::forms::{product_value_multiset, BoxBounds, SignMode, ValueMultiset};

/// `{α·m}` computed exactly from the binary expansion of `alpha`.
pub fn phase_fraction(alpha: f64, m: &BigInt) -> f64 {
    let (mant, exp, sign) = alpha.integer_decode();
    if mant == 0 || exp >= 0 {
        return 0.0;
    }
    let shift = (-exp) as u32;
    let signed_mant = sign as i128 * mant as i128;
    if shift <= 127 {
        if let Some(mv) = m.to_i128() {
            let prod = (signed_mant as u128).wrapping_mul(mv as u128);
            let masked = prod & ((1u128 << shift) - 1);
            return (masked as f64 / 2f64.powi(shift as i32)).rem_euclid(1.0);
        }
    }
    let modulus = BigInt::one() << shift;
    let r = (BigInt::from(signed_mant) * m).mod_floor(&modulus);
    let drop = shift.saturating_sub(64);
    let top = (r >> drop).to_f64().unwrap_or(0.0);
    (top * 2f64.powi(-((shift - drop) as i32))).rem_euclid(1.0)
}

fn sum_over_multiset(alpha: f64, ms: &ValueMultiset) -> Complex64 {
    let mut acc = ComplexSum::default();
    for (v, mult) in ms.iter() {
        let w = mult.to_f64().unwrap_or(f64::INFINITY);
        acc.add(e(phase_fraction(alpha, v)) * w);
    }
    acc.value()
}

/// `f_k(α, X) = Σ_{1 ≤ x ≤ X} e(α⟨x⟩^d)`, summed over distinct products.
pub fn weyl_sum(alpha: f64, degree: u32, bounds: &BoxBounds) -> Result<Complex64> {
    if !alpha.is_finite() {
        return invalid("alpha must be finite");
    }
    let ms = product_value_multiset(degree, bounds, SignMode::Positive)?;
    Ok(sum_over_multiset(alpha, &ms))
}

/// Weyl sums at several `α` sharing one box.
pub fn weyl_sums(alphas: &[f64], degree: u32, bounds: &BoxBounds) -> Result<Vec<Complex64>> {
    let ms = product_value_multiset(degree, bounds, SignMode::Positive)?;
    Ok(alphas.iter().map(|&a| sum_over_multiset(a, &ms)).collect())
}

/// `k`-fold loop evaluation of `f_k`; test oracle.
pub fn weyl_sum_direct(alpha: f64, degree: u32, bounds: &BoxBounds) -> Complex64 {
    let floors = bounds.floors();
    let mut acc = ComplexSum::default();
    let mut x = vec![1u64; floors.len()];
    loop {
        let prod: BigInt = x.iter().fold(BigInt::one(), |p, &xi| p * xi);
        acc.add(e(phase_fraction(alpha, &prod.pow(degree))));
        let mut i = 0;
        loop {
            if i == x.len() {
                return acc.value();
            }
            if x[i] < floors[i] {
                x[i] += 1;
                break;
            }
            x[i] = 1;
            i += 1;
        }
    }
}

/// Counts of `⟨x⟩ mod p^e` for `x ∈ (Z/p^eZ)^k`, via the valuation of the product.
fn prime_power_products(p: u64, e: u32, k: usize) -> Result<Vec<u128>> {
    let q = p.pow(e) as usize;
    let phi = |j: u32| -> u128 { if j == 0 { 1 } else { (p as u128).pow(j - 1) * (p as u128 - 1) } };
    // ways[v] for v < e: tuples with total valuation v and no zero coordinate
    let mut ways = vec![0u128; e as usize];
    ways[0] = 1;
    for _ in 0..k {
        let mut next = vec![0u128; e as usize];
        for (v, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for add in 0..(e as usize - v) {
                let f = phi(e - add as u32);
                let term = w.checked_mul(f).ok_or(Error::Overflow("residue distribution"))?;
                next[v + add] = next[v + add]
                    .checked_add(term)
                    .ok_or(Error::Overflow("residue distribution"))?;
            }
        }
        ways = next;
    }
    let total = (q as u128)
        .checked_pow(k as u32)
        .ok_or(Error::Overflow("residue distribution"))?;
    let mut out = vec![0u128; q];
    let mut nonzero = 0u128;
    for (r, slot) in out.iter_mut().enumerate().skip(1) {
        let v = crate::arith::valuation(r as i128, p) as usize;
        let classes = phi(e - v as u32);
        if !ways[v].is_multiple_of(classes) {
            return Err(Error::Consistency("uneven unit distribution".into()));
        }
        *slot = ways[v] / classes;
        nonzero += *slot;
    }
    out[0] = total - nonzero;
    Ok(out)
}

/// Counts of `⟨x⟩ mod q` for `x ∈ (Z/qZ)^k`.
pub fn product_residues(q: u64, k: usize) -> Result<Vec<u128>> {
    if q == 0 {
        return invalid("modulus must be positive");
    }
    if q == 1 {
        return Ok(vec![1]);
    }
    let parts: Vec<(u64, Vec<u128>)> = factorize(q)
        .into_iter()
        .map(|(p, e)| Ok((p.pow(e), prime_power_products(p, e, k)?)))
        .collect::<Result<_>>()?;
    let mut out = vec![0u128; q as usize];
    for (r, slot) in out.iter_mut().enumerate() {
        let mut c: u128 = 1;
        for (m, dist) in &parts {
            c = c
                .checked_mul(dist[r % *m as usize])
                .ok_or(Error::Overflow("residue distribution"))?;
        }
        *slot = c;
    }
    Ok(out)
}

/// Same distribution by `k`-fold multiplicative convolution; oracle.
pub fn product_residues_direct(q: u64, k: usize) -> Result<Vec<u128>> {
    if q == 0 {
        return invalid("modulus must be positive");
    }
    let q = q as usize;
    let mut dist = vec![0u128; q];
    dist[1 % q] = 1;
    for _ in 0..k {
        let mut next = vec![0u128; q];
        for (r, &c) in dist.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for x in 0..q {
                next[r * x % q] += c;
            }
        }
        dist = next;
    }
    Ok(dist)
}

/// Counts of `⟨x⟩^d mod q`.
pub fn power_residues(q: u64, degree: u32, k: usize) -> Result<Vec<u128>> {
    let base = product_residues(q, k)?;
    let mut out = vec![0u128; q as usize];
    for (r, &c) in base.iter().enumerate() {
        if c != 0 {
            out[pow_mod(r as u64, degree as u64, q) as usize] += c;
        }
    }
    Ok(out)
}

/// `S_k(q, a) = Σ_{x mod q} e(a⟨x⟩^d/q)`.
pub fn complete_sum(q: u64, a: i64, degree: u32, k: usize) -> Result<Complex64> {
    let dist = power_residues(q, degree, k)?;
    let mut acc = ComplexSum::default();
    for (r, &c) in dist.iter().enumerate() {
        if c != 0 {
            acc.add(e_frac(a as i128 * r as i128, q) * c as f64);
        }
    }
    Ok(acc.value())
}

/// `S_k(q, b)` for every `b mod q` at once, by one inverse DFT.
pub fn complete_sum_spectrum(q: u64, degree: u32, k: usize) -> Result<Vec<Complex64>> {
    let dist = power_residues(q, degree, k)?;
    let mut buf: Vec<Complex64> = dist.iter().map(|&c| Complex64::new(c as f64, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft(buf.len(), FftDirection::Inverse);
    fft.process(&mut buf);
    Ok(buf)
}

/// Literal `q^k`-term evaluation of `S_k(q, a)`; oracle for small `q`.
pub fn complete_sum_naive(q: u64, a: i64, degree: u32, k: usize) -> Complex64 {
    let mut acc = ComplexSum::default();
    let mut x = vec![0u64; k];
    loop {
        let prod = x.iter().fold(1u64 % q, |p, &xi| p * xi % q);
        let val = pow_mod(prod, degree as u64, q);
        acc.add(e_frac(a as i128 * val as i128, q));
        let mut i = 0;
        loop {
            if i == k {
                return acc.value();
            }
            x[i] += 1;
            if x[i] < q {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

/// `a/q` in lowest terms with `q ≥ 1`.
pub fn reduce_fraction(a: i64, q: u64) -> (i64, u64) {
    let g = crate::arith::gcd(a as i128, q as i128) as i64;
    if g == 0 {
        return (0, 1);
    }
    (a / g, q / g as u64)
}

/// `E(q, X) = q^k + Σ_{r<k} q^{k-r} X_1⋯X_r` with `X` sorted descending.
pub fn box_error_term(q: u64, bounds: &BoxBounds) -> f64 {
    let x = bounds.sorted_desc();
    let k = x.len() as i32;
    let qf = q as f64;
    let mut total = qf.powi(k);
    let mut prefix = 1.0;
    for r in 1..k {
        prefix *= x[r as usize - 1];
        total += qf.powi(k - r) * prefix;
    }
    total
}

/// `∫_0^1 |f_k(α, X)|^{power} dα` as an exact count: solutions of
/// `Σ_{i≤t} ⟨x_i⟩^d = Σ_{i≤t} ⟨y_i⟩^d` with `power = 2t`.
pub fn moment_integral(degree: u32, bounds: &BoxBounds, power: u32) -> Result<BigUint> {
    if power == 0 || power % 2 == 1 {
        return invalid("moment power must be a positive even integer");
    }
    let base = product_value_multiset(degree, bounds, SignMode::Positive)?;
    let mut acc = ValueMultiset::zero_sum();
    for _ in 0..power / 2 {
        acc = acc.sum_convolve(&base);
    }
    Ok(acc.sum_of_squares())
}

/// The same moment by an equally spaced rule with more nodes than twice the
/// top frequency of `|f|^{2t}`; the rule is exact up to rounding.
pub fn moment_quadrature(degree: u32, bounds: &BoxBounds, power: u32) -> Result<f64> {
    if power == 0 || power % 2 == 1 {
        return invalid("moment power must be a positive even integer");
    }
    let base = product_value_multiset(degree, bounds, SignMode::Positive)?;
    let top = base
        .iter()
        .map(|(v, _)| v.to_u64())
        .max()
        .flatten()
        .ok_or(Error::Overflow("moment quadrature frequency"))?;
    let nodes = (power as u64)
        .checked_mul(top)
        .and_then(|v| v.checked_add(1))
        .filter(|&n| n <= 1 << 27)
        .ok_or(Error::Overflow("moment quadrature frequency"))? as usize;
    let mut buf = vec![Complex64::zero(); nodes];
    for (v, mult) in base.iter() {
        buf[v.to_usize().expect("bounded above")] += Complex64::new(mult.to_f64().unwrap_or(0.0), 0.0);
    }
    FftPlanner::new().plan_fft(nodes, FftDirection::Inverse).process(&mut buf);
    let sum: crate::arith::NeumaierSum = buf.iter().map(|f| f.norm_sqr().powi(power as i32 / 2)).collect();
    Ok(sum.value() / nodes as f64)
}

/// `q^{-k} S_k(q, a)` after reducing `a/q`.
pub fn normalized_complete_sum(q: u64, a: i64, degree: u32, k: usize) -> Result<Complex64> {
    let (a, q) = reduce_fraction(a, q);
    Ok(complete_sum(q, a, degree, k)? / (q as f64).powi(k as i32))
}

/// Units `a mod q` in increasing order (`{0}` when `q = 1`).
pub fn units(q: u64) -> Vec<u64> {
    (0..q).filter(|&a| gcd_u64(a, q) == 1).collect()
}
