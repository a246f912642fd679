//! Exact enumeration of solutions of diagonal equations over products.
//!
//! The equation is `Σ_j c_j ⟨x_j⟩^d = 0` where each `x_j` has `k` integer
//! coordinates and `⟨x⟩` is the product of the coordinates. Counts are exact
//! arbitrary-precision integers.

mod counting;
mod height;
mod multiset;

pub use counting::{
    count_box_positive, count_box_primitive, count_box_primitive_direct, count_box_signed,
    count_box_signed_direct, count_box_positive_direct,
};
pub use height::{
    height_count, height_count_direct, height_threshold, hyperbolic_solution_count, theta,
    theta_direct,
};
pub use multiset::{product_value_multiset, SignMode, ValueMultiset};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `Σ_{j=1}^s c_j ⟨x_j⟩^d = 0` with `x_j` ranging over `k`-tuples.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagonalForm {
    degree: u32,
    factors: usize,
    coeffs: Vec<i64>,
}

impl DiagonalForm {
    pub fn new(degree: u32, factors: usize, coeffs: Vec<i64>) -> Result<Self> {
        if degree == 0 {
            return invalid("degree must be at least 1");
        }
        if factors == 0 {
            return invalid("factor count must be at least 1");
        }
        if coeffs.len() < 2 {
            return invalid("a diagonal form needs at least two terms");
        }
        if coeffs.contains(&0) {
            return invalid("coefficients must be nonzero");
        }
        Ok(Self {
            degree,
            factors,
            coeffs,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// `|c| = max_j |c_j|`.
    pub fn max_coeff(&self) -> u64 {
        self.coeffs.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    /// Same form with every coefficient multiplied by `m`.
    pub fn scaled(&self, m: i64) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| c.checked_mul(m))
            .collect::<Option<Vec<_>>>()
            .ok_or(crate::Error::Overflow("coefficient scaling"))?;
        Self::new(self.degree, self.factors, coeffs)
    }

    /// Coordinatewise product `η·c` for a sign vector.
    pub fn with_signs(&self, signs: &[i8]) -> Result<Self> {
        if signs.len() != self.coeffs.len() {
            return invalid("sign vector length must equal the number of terms");
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(signs)
            .map(|(&c, &e)| if e < 0 { -c } else { c })
            .collect();
        Self::new(self.degree, self.factors, coeffs)
    }

    pub fn all_same_sign(&self) -> bool {
        self.coeffs.iter().all(|&c| c > 0) || self.coeffs.iter().all(|&c| c < 0)
    }
}

/// The multiprojective variety `Σ_j a_j (x_{1,j}⋯x_{k,j})^d = 0` in `(P^n)^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variety {
    form: DiagonalForm,
}

impl Variety {
    /// Coefficients are `a_0..a_n`.
    pub fn new(degree: u32, factors: usize, coeffs: Vec<i64>) -> Result<Self> {
        Ok(Self {
            form: DiagonalForm::new(degree, factors, coeffs)?,
        })
    }

    pub fn from_form(form: DiagonalForm) -> Self {
        Self { form }
    }

    pub fn form(&self) -> &DiagonalForm {
        &self.form
    }

    pub fn n(&self) -> usize {
        self.form.terms() - 1
    }

    /// Height exponent `n + 1 - d`.
    pub fn alpha(&self) -> i64 {
        self.form.terms() as i64 - self.form.degree() as i64
    }
}

/// Per-factor bounds `X_1..X_k`, all at least 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    bounds: Vec<f64>,
}

impl BoxBounds {
    pub fn new(bounds: Vec<f64>) -> Result<Self> {
        if bounds.is_empty() {
            return invalid("box must have at least one side");
        }
        if bounds.iter().any(|x| !x.is_finite() || *x < 1.0) {
            return invalid("box sides must be finite and at least 1");
        }
        Ok(Self { bounds })
    }

    /// Cube `(x, .., x)` in `k` dimensions.
    pub fn cube(k: usize, x: f64) -> Result<Self> {
        Self::new(vec![x; k])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// Integer ranges `1..=⌊X_i⌋`.
    pub fn floors(&self) -> Vec<u64> {
        self.bounds.iter().map(|x| x.floor() as u64).collect()
    }

    /// `⟨X⟩ = Π X_i` as a real number.
    pub fn volume(&self) -> f64 {
        self.bounds.iter().product()
    }

    /// `Π ⌊X_i⌋`, the number of positive lattice points.
    pub fn lattice_volume(&self) -> BigUint {
        self.floors()
            .into_iter()
            .fold(BigUint::from(1u32), |acc, x| acc * x)
    }

    /// Sides sorted in descending order.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.bounds.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub(crate) fn from_floors(floors: &[u64]) -> Self {
        Self {
            bounds: floors.iter().map(|&x| x as f64).collect(),
        }
    }
}
