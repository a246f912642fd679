use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};

use super::multiset::{product_value_multiset, SignMode, ValueMultiset};
use super::{BoxBounds, DiagonalForm};
use crate::arith::{gcd_slice, mobius_sieve};
use crate::error::{invalid, Error, Result};

fn check_dims(form: &DiagonalForm, bounds: &BoxBounds) -> Result<()> {
    if form.factors() != bounds.dim() {
        return invalid(format!(
            "box has {} sides but the form has {} factors",
            bounds.dim(),
            form.factors()
        ));
    }
    Ok(())
}

/// Meet in the middle: partial-sum multisets of the two halves of the terms
/// are joined by looking up negated values.
fn count_by_convolution(form: &DiagonalForm, bounds: &BoxBounds, mode: SignMode) -> Result<BigUint> {
    check_dims(form, bounds)?;
    let base = product_value_multiset(form.degree(), bounds, mode)?;
    let mut per_coeff: HashMap<i64, ValueMultiset> = HashMap::new();
    for &c in form.coeffs() {
        per_coeff.entry(c).or_insert_with(|| base.scaled(c));
    }
    let split = form.terms() / 2;
    let half = |terms: &[i64]| {
        terms
            .iter()
            .fold(ValueMultiset::zero_sum(), |acc, c| acc.sum_convolve(&per_coeff[c]))
    };
    let left = half(&form.coeffs()[..split]);
    let right = half(&form.coeffs()[split..]);
    Ok(left.count_zero_sum(&right))
}

/// `M⁺_c(X)`: solutions with every coordinate in `1..=⌊X_i⌋`.
pub fn count_box_positive(form: &DiagonalForm, bounds: &BoxBounds) -> Result<BigUint> {
    count_by_convolution(form, bounds, SignMode::Positive)
}

/// `M_c(X)`: solutions with `1 ≤ |x_{j,i}| ≤ X_i`.
pub fn count_box_signed(form: &DiagonalForm, bounds: &BoxBounds) -> Result<BigUint> {
    count_by_convolution(form, bounds, SignMode::SignedNonzero)
}

/// `M*_c(X)`: signed solutions where, for each factor `i`, the entries
/// `x_{1,i}, .., x_{s,i}` are coprime. Computed by Möbius inversion over the
/// per-factor gcds.
pub fn count_box_primitive(form: &DiagonalForm, bounds: &BoxBounds) -> Result<BigUint> {
    check_dims(form, bounds)?;
    let floors = bounds.floors();
    let max = *floors.iter().max().unwrap_or(&1) as usize;
    let mu = mobius_sieve(max);
    let mut memo: HashMap<Vec<u64>, BigUint> = HashMap::new();
    let mut total = BigInt::zero();
    let mut l = vec![1u64; floors.len()];
    loop {
        let sign: i8 = l.iter().map(|&li| mu[li as usize]).product();
        if sign != 0 {
            let sub: Vec<u64> = floors.iter().zip(&l).map(|(&x, &li)| x / li).collect();
            let m = match memo.get(&sub) {
                Some(v) => v.clone(),
                None => {
                    let v = count_box_signed(form, &BoxBounds::from_floors(&sub))?;
                    memo.insert(sub, v.clone());
                    v
                }
            };
            if sign > 0 {
                total += BigInt::from(m);
            } else {
                total -= BigInt::from(m);
            }
        }
        // odometer over l_i in 1..=floor_i
        let mut i = 0;
        loop {
            if i == l.len() {
                return if total.is_negative() {
                    Err(Error::Consistency("negative Möbius sum".into()))
                } else {
                    Ok(total.to_biguint().expect("nonnegative"))
                };
            }
            if l[i] < floors[i] {
                l[i] += 1;
                break;
            }
            l[i] = 1;
            i += 1;
        }
    }
}

/// Brute-force enumeration over rows, one row per factor.
///
/// Row `i` holds `x_{1,i}, .., x_{s,i}`; the term values are accumulated
/// as running products down the rows.
fn enumerate_rows(
    form: &DiagonalForm,
    bounds: &BoxBounds,
    positive_only: bool,
    primitive_rows: bool,
) -> Result<BigUint> {
    check_dims(form, bounds)?;
    let s = form.terms();
    let rows: Vec<Vec<Vec<i64>>> = bounds
        .floors()
        .into_iter()
        .map(|x| {
            let x = x as i64;
            let coords: Vec<i64> = if positive_only {
                (1..=x).collect()
            } else {
                (-x..=x).filter(|&v| v != 0).collect()
            };
            let mut out = Vec::new();
            let mut row = vec![0usize; s];
            loop {
                let r: Vec<i64> = row.iter().map(|&i| coords[i]).collect();
                if !primitive_rows || gcd_slice(&r) == 1 {
                    out.push(r);
                }
                let mut j = 0;
                loop {
                    if j == s {
                        return out;
                    }
                    row[j] += 1;
                    if row[j] < coords.len() {
                        break;
                    }
                    row[j] = 0;
                    j += 1;
                }
            }
        })
        .collect();
    let mut count = 0u64;
    let mut partial = vec![vec![1i128; s]; rows.len() + 1];
    descend(form, &rows, 0, &mut partial, &mut count)?;
    Ok(BigUint::from(count))
}

fn descend(
    form: &DiagonalForm,
    rows: &[Vec<Vec<i64>>],
    depth: usize,
    partial: &mut Vec<Vec<i128>>,
    count: &mut u64,
) -> Result<()> {
    if depth == rows.len() {
        let mut acc: i128 = 0;
        for (j, &c) in form.coeffs().iter().enumerate() {
            let term = partial[depth][j]
                .checked_pow(form.degree())
                .and_then(|v| v.checked_mul(c as i128))
                .ok_or(Error::Overflow("direct enumeration"))?;
            acc = acc.checked_add(term).ok_or(Error::Overflow("direct enumeration"))?;
        }
        if acc == 0 {
            *count += 1;
        }
        return Ok(());
    }
    for row in &rows[depth] {
        for j in 0..row.len() {
            partial[depth + 1][j] = partial[depth][j] * row[j] as i128;
        }
        descend(form, rows, depth + 1, partial, count)?;
    }
    Ok(())
}

/// Brute-force `M⁺_c(X)`; exponential cost, intended as a test oracle.
pub fn count_box_positive_direct(form: &DiagonalForm, bounds: &BoxBounds) -> Result<BigUint> {
    enumerate_rows(form, bounds, true, false)
}

/// Brute-force `M_c(X)`; exponential cost, intended as a test oracle.
pub fn count_box_signed_direct(form: &DiagonalForm, bounds: &BoxBounds) -> Result<BigUint> {
    enumerate_rows(form, bounds, false, false)
}

/// `M*_c(X)` by direct gcd-filtered enumeration, independent of the Möbius route.
pub fn count_box_primitive_direct(form: &DiagonalForm, bounds: &BoxBounds) -> Result<BigUint> {
    enumerate_rows(form, bounds, false, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(d: u32, k: usize, c: &[i64]) -> DiagonalForm {
        DiagonalForm::new(d, k, c.to_vec()).unwrap()
    }

    fn bx(x: &[f64]) -> BoxBounds {
        BoxBounds::new(x.to_vec()).unwrap()
    }

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn positive_examples() {
        assert_eq!(count_box_positive(&form(1, 1, &[1, -1]), &bx(&[5.0])).unwrap(), n(5));
        assert_eq!(count_box_positive(&form(1, 2, &[1, -1]), &bx(&[2.0, 2.0])).unwrap(), n(6));
        assert_eq!(count_box_positive(&form(1, 1, &[1, 1, -2]), &bx(&[3.0])).unwrap(), n(5));
    }

    #[test]
    fn signed_examples() {
        assert_eq!(count_box_signed(&form(1, 1, &[1, -1]), &bx(&[5.0])).unwrap(), n(10));
        assert_eq!(count_box_signed(&form(2, 1, &[1, -1]), &bx(&[5.0])).unwrap(), n(20));
        assert_eq!(count_box_signed(&form(1, 1, &[1, 1]), &bx(&[3.0])).unwrap(), n(6));
    }

    #[test]
    fn primitive_examples() {
        let f = form(1, 1, &[1, -1]);
        assert_eq!(count_box_primitive(&f, &bx(&[5.0])).unwrap(), n(2));
        assert_eq!(count_box_primitive(&f, &bx(&[1.0])).unwrap(), n(2));
        assert_eq!(count_box_primitive_direct(&f, &bx(&[5.0])).unwrap(), n(2));
        // μ(1)M(5) + μ(2)M(2.5) + μ(3)M(5/3) + μ(5)M(1) = 10 - 4 - 2 - 2
        let m = |x: f64| count_box_signed(&f, &bx(&[x])).unwrap();
        assert_eq!((m(5.0), m(2.5), m(5.0 / 3.0), m(1.0)), (n(10), n(4), n(2), n(2)));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(count_box_positive(&form(1, 2, &[1, -1]), &bx(&[3.0])).is_err());
    }

    #[test]
    fn convolution_matches_brute_force_with_four_terms() {
        let f = form(2, 2, &[1, 2, -1, -2]);
        let b = bx(&[4.0, 3.0]);
        assert_eq!(
            count_box_positive(&f, &b).unwrap(),
            count_box_positive_direct(&f, &b).unwrap()
        );
        assert_eq!(
            count_box_signed(&f, &b).unwrap(),
            count_box_signed_direct(&f, &b).unwrap()
        );
    }
}
