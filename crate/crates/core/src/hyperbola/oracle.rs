use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Parameters `(α, c_h, c, D, ν, δ)` declared by a family of arithmetic functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub alpha: f64,
    pub c_h: f64,
    pub c: f64,
    pub big_d: f64,
    pub nu: f64,
    pub delta: f64,
}

impl FamilyParams {
    pub fn new(alpha: f64, c_h: f64, c: f64, big_d: f64, nu: f64, delta: f64) -> Result<Self> {
        let all = [alpha, c_h, c, big_d, nu, delta];
        if all.iter().any(|v| !v.is_finite()) {
            return invalid("family parameters must be finite");
        }
        if alpha <= 0.0 {
            return invalid("alpha must be positive");
        }
        if c_h < 0.0 || c_h > c {
            return invalid("need 0 <= c_h <= c");
        }
        if big_d < 0.0 {
            return invalid("D must be nonnegative");
        }
        if !(nu > 0.0 && nu <= 1.0) {
            return invalid("nu must lie in (0, 1]");
        }
        if !(delta > 0.0 && delta < alpha.min(1.0)) {
            return invalid("delta must lie in (0, min(1, alpha))");
        }
        Ok(Self {
            alpha,
            c_h,
            c,
            big_d,
            nu,
            delta,
        })
    }

    /// Parameters of the constant function 1: box sums are `⟨X⟩ + O(⟨X⟩/min X)`.
    pub fn divisor() -> Self {
        Self::new(1.0, 1.0, 1.0, 0.0, 1.0, 0.5).expect("valid constants")
    }
}

/// A nonnegative function `h: N^k → [0, ∞)` with its box sums
/// `H(X) = Σ_{x ≤ X} h(x)`.
///
/// Implementations must be callable from several threads at once.
pub trait BoxSumOracle: Sync {
    fn dim(&self) -> usize;

    fn params(&self) -> FamilyParams;

    fn point(&self, x: &[u64]) -> f64;

    /// True when `h` takes nonnegative integer values below `2^53` and
    /// [`Self::box_sum`] is exact; exact-equality checks are skipped otherwise.
    fn is_exact(&self) -> bool {
        false
    }

    /// `H(X)` over `1 ≤ x_i ≤ ⌊X_i⌋`. The default folds point values.
    fn box_sum(&self, bounds: &[f64]) -> f64 {
        fold_box(self, bounds)
    }

    /// `Σ_{lo < u ≤ hi} h(prefix, u)` along the last coordinate.
    fn run_sum(&self, prefix: &mut Vec<u64>, lo: u64, hi: u64) -> f64 {
        let mut acc = crate::arith::NeumaierSum::default();
        for u in lo + 1..=hi {
            prefix.push(u);
            acc.add(self.point(prefix));
            prefix.pop();
        }
        acc.value()
    }

    /// `g_i(x)` when `h(x) = Π_i g_i(x_i)`.
    fn coordinate_factor(&self, _i: usize, _x: u64) -> Option<f64> {
        None
    }
}

fn fold_box<O: BoxSumOracle + ?Sized>(oracle: &O, bounds: &[f64]) -> f64 {
    let floors: Vec<u64> = bounds.iter().map(|b| b.max(0.0).floor() as u64).collect();
    if floors.contains(&0) {
        return 0.0;
    }
    let mut x = vec![1u64; floors.len()];
    let mut acc = crate::arith::NeumaierSum::default();
    loop {
        acc.add(oracle.point(&x));
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

/// `h ≡ 1` on `N^k`; its hyperbolic sums are the iterated divisor sums.
#[derive(Debug, Clone, Copy)]
pub struct Ones {
    pub k: usize,
}

impl BoxSumOracle for Ones {
    fn dim(&self) -> usize {
        self.k
    }
    fn params(&self) -> FamilyParams {
        FamilyParams::divisor()
    }
    fn point(&self, _x: &[u64]) -> f64 {
        1.0
    }
    fn is_exact(&self) -> bool {
        true
    }
    fn box_sum(&self, bounds: &[f64]) -> f64 {
        bounds.iter().map(|b| b.max(0.0).floor()).product()
    }
    fn run_sum(&self, _prefix: &mut Vec<u64>, lo: u64, hi: u64) -> f64 {
        hi.saturating_sub(lo) as f64
    }
    fn coordinate_factor(&self, _i: usize, _x: u64) -> Option<f64> {
        Some(1.0)
    }
}

/// A point function given as a closure; box sums fold it.
pub struct FnOracle<F> {
    k: usize,
    params: FamilyParams,
    exact: bool,
    h: F,
}

impl<F: Fn(&[u64]) -> f64 + Sync> FnOracle<F> {
    /// `exact` declares that `h` is integer valued.
    pub fn new(k: usize, params: FamilyParams, exact: bool, h: F) -> Self {
        Self { k, params, exact, h }
    }
}

impl<F: Fn(&[u64]) -> f64 + Sync> BoxSumOracle for FnOracle<F> {
    fn dim(&self) -> usize {
        self.k
    }
    fn params(&self) -> FamilyParams {
        self.params
    }
    fn point(&self, x: &[u64]) -> f64 {
        (self.h)(x)
    }
    fn is_exact(&self) -> bool {
        self.exact
    }
}

/// `h_σ(x) = h(x_σ(1), .., x_σ(k))`.
pub struct Permuted<'a, O: ?Sized> {
    inner: &'a O,
    perm: Vec<usize>,
}

impl<'a, O: BoxSumOracle + ?Sized> Permuted<'a, O> {
    pub fn new(inner: &'a O, perm: Vec<usize>) -> Result<Self> {
        let mut seen = perm.clone();
        seen.sort_unstable();
        if seen != (0..inner.dim()).collect::<Vec<_>>() {
            return invalid("not a permutation of the coordinates");
        }
        Ok(Self { inner, perm })
    }
}

impl<O: BoxSumOracle + ?Sized> BoxSumOracle for Permuted<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn params(&self) -> FamilyParams {
        self.inner.params()
    }
    fn point(&self, x: &[u64]) -> f64 {
        let y: Vec<u64> = self.perm.iter().map(|&i| x[i]).collect();
        self.inner.point(&y)
    }
    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }
    fn coordinate_factor(&self, i: usize, x: u64) -> Option<f64> {
        // coordinate i of x feeds slot j of the inner function where perm[j] = i
        let j = self.perm.iter().position(|&p| p == i)?;
        self.inner.coordinate_factor(j, x)
    }
}
