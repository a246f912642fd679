use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::BoxBounds;
use crate::error::{invalid, Result};

/// Which coordinates a box admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignMode {
    /// `1 ≤ x_i ≤ X_i`
    Positive,
    /// `1 ≤ |x_i| ≤ X_i`
    SignedNonzero,
}

/// Exact value → multiplicity map, ordered by value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValueMultiset {
    map: BTreeMap<BigInt, BigUint>,
}

impl ValueMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// The multiset `{0: 1}`, neutral for additive convolution.
    pub fn zero_sum() -> Self {
        let mut m = Self::new();
        m.insert(BigInt::zero(), BigUint::one());
        m
    }

    pub fn insert(&mut self, value: BigInt, mult: BigUint) {
        if mult.is_zero() {
            return;
        }
        *self.map.entry(value).or_default() += mult;
    }

    pub fn get(&self, value: &BigInt) -> BigUint {
        self.map.get(value).cloned().unwrap_or_default()
    }

    /// Number of distinct values.
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BigInt, &BigUint)> {
        self.map.iter()
    }

    pub fn total(&self) -> BigUint {
        self.map.values().sum()
    }

    /// Multiply every value by `c`.
    pub fn scaled(&self, c: i64) -> Self {
        let c = BigInt::from(c);
        let mut out = Self::new();
        for (v, m) in &self.map {
            out.insert(v * &c, m.clone());
        }
        out
    }

    /// Distribution of `a + b` for `a` drawn from `self`, `b` from `other`.
    pub fn sum_convolve(&self, other: &Self) -> Self {
        let mut out = Self::new();
        for (a, ma) in &self.map {
            for (b, mb) in &other.map {
                out.insert(a + b, ma * mb);
            }
        }
        out
    }

    /// `Σ_v self[v] · other[-v]`: the number of pairs summing to zero.
    pub fn count_zero_sum(&self, other: &Self) -> BigUint {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = BigUint::zero();
        for (v, m) in &small.map {
            if let Some(n) = large.map.get(&-v) {
                acc += m * n;
            }
        }
        acc
    }

    /// `Σ_v self[v]^2`.
    pub fn sum_of_squares(&self) -> BigUint {
        self.map.values().map(|m| m * m).sum()
    }

    /// Replace each value `v` by `v^d`.
    pub fn powered(&self, d: u32) -> Self {
        let mut out = Self::new();
        for (v, m) in &self.map {
            out.insert(v.pow(d), m.clone());
        }
        out
    }
}

/// Multiplicities of `⟨x⟩^d` as `x` runs over the admissible points of `bounds`.
pub fn product_value_multiset(
    d: u32,
    bounds: &BoxBounds,
    mode: SignMode,
) -> Result<ValueMultiset> {
    if d == 0 {
        return invalid("degree must be at least 1");
    }
    if bounds.dim() == 0 {
        return invalid("empty box");
    }
    // Positive products first; signs are attached afterwards since the
    // product sign depends only on the parity of negative coordinates.
    let mut products: BTreeMap<BigUint, BigUint> = BTreeMap::new();
    products.insert(BigUint::one(), BigUint::one());
    for x_max in bounds.floors() {
        let mut next: BTreeMap<BigUint, BigUint> = BTreeMap::new();
        for (m, c) in &products {
            for x in 1..=x_max {
                *next.entry(m * x).or_default() += c;
            }
        }
        products = next;
    }
    let mut out = ValueMultiset::new();
    match mode {
        SignMode::Positive => {
            for (m, c) in products {
                out.insert(BigInt::from(m).pow(d), c);
            }
        }
        SignMode::SignedNonzero => {
            // Each |product| arises from 2^k sign patterns, half of each sign.
            let half = BigUint::one() << (bounds.dim() - 1);
            for (m, c) in products {
                let pos = BigInt::from(m);
                let neg = -&pos;
                let mult = &c * &half;
                out.insert(pos.pow(d), mult.clone());
                out.insert(neg.pow(d), mult);
            }
        }
    }
    debug_assert!(out.iter().all(|(v, _)| !v.is_zero()));
    debug_assert!(out.iter().all(|(v, _)| d % 2 == 1 || v.is_positive()));
    Ok(out)
}
