use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::error::{invalid, Result};
use crate::forms::BoxBounds;

/// Exponents from the minor-arc estimates. They are far too small to be
/// observed numerically and are exposed for reference and surrogate scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// `ω = (8dk)^{-8}`
    pub omega: f64,
    /// `η = ω / (2 D^k d k)`
    pub eta: f64,
    /// `D = 2^{d-1}`
    pub d_weyl: u64,
}

impl BoundParams {
    pub fn new(degree: u32, factors: u32) -> Self {
        let (d, k) = (degree as f64, factors as f64);
        let omega = (8.0 * d * k).powi(-8);
        let d_weyl = 1u64 << (degree - 1);
        let eta = omega / (2.0 * (d_weyl as f64).powi(factors as i32) * d * k);
        Self { omega, eta, d_weyl }
    }

    /// `U = X_k^{kω/s}` for the smallest side `X_k`.
    pub fn minor_threshold(&self, smallest_side: f64, factors: u32, terms: u32) -> f64 {
        smallest_side.powf(factors as f64 * self.omega / terms as f64)
    }
}

/// `⟨X⟩^{D^k}(1/q + 1/X_k + q/⟨X⟩^d)` with the `⟨X⟩^ε` factor split off as
/// `eps_scale = log⟨X⟩`, so the full bound is `value · exp(ε · eps_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub value: f64,
    pub eps_scale: f64,
}

pub fn weyl_bound_envelope(
    alpha: f64,
    degree: u32,
    bounds: &BoxBounds,
    a: i64,
    q: u64,
) -> Result<Envelope> {
    if q == 0 || gcd(a as i128, q as i128) != 1 {
        return invalid("need q ≥ 1 and gcd(a, q) = 1");
    }
    if (q as f64 * alpha - a as f64).abs() > 1.0 / q as f64 + 1e-12 {
        return invalid("need |qα − a| ≤ 1/q");
    }
    let k = bounds.dim() as i32;
    let x = bounds.sorted_desc();
    let p = bounds.volume();
    let dk = ((1u64 << (degree - 1)) as f64).powi(k);
    let qf = q as f64;
    let value = p.powf(dk) * (1.0 / qf + 1.0 / x[x.len() - 1] + qf / p.powi(degree as i32));
    Ok(Envelope {
        value,
        eps_scale: p.ln(),
    })
}
