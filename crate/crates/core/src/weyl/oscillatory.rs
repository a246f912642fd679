//! The oscillatory integrals `V_k(β) = ∫_{[0,1]^k} e(β⟨t⟩^d) dt`.
//!
//! Uses `V_0(w) = e(w)` and, for `β > 0`,
//! `V_{l+1}(β) = (d β^{1/d})^{-1} ∫_0^β V_l(w) w^{1/d-1} dw`.
//! The inner integrals are tabulated cumulatively on a grid in `w` so that a
//! query only integrates over the last partial cell.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::quadrature::integrate;
use crate::arith::e;
use crate::error::{invalid, Result};
use crate::forms::BoxBounds;

const CELL: f64 = 0.5;
const CELL_TOL: f64 = 1e-13;
const MAX_PANELS: usize = 4000;

/// Tabulated evaluator of `V_k` on `|β| ≤ beta_max`.
#[derive(Debug, Clone)]
pub struct OscillatoryTable {
    degree: u32,
    factors: u32,
    beta_max: f64,
    // cumulative[l][i] = ∫_0^{i·CELL} V_l(w) w^{1/d-1} dw, for l < factors
    cumulative: Vec<Vec<Complex64>>,
}

impl OscillatoryTable {
    pub fn new(degree: u32, factors: u32, beta_max: f64) -> Result<Self> {
        if degree == 0 || factors == 0 {
            return invalid("degree and factor count must be positive");
        }
        if !beta_max.is_finite() || beta_max < 0.0 {
            return invalid("beta range must be finite");
        }
        let cells = (beta_max / CELL).ceil() as usize + 1;
        let mut table = Self {
            degree,
            factors,
            beta_max,
            cumulative: Vec::new(),
        };
        for level in 0..factors {
            if level == 0 && degree == 1 && factors == 1 {
                break;
            }
            let increments: Vec<Result<Complex64>> = (0..cells)
                .into_par_iter()
                .map(|i| table.cell_integral(level, i as f64 * CELL, (i + 1) as f64 * CELL))
                .collect();
            let mut acc = Vec::with_capacity(cells + 1);
            let mut running = Complex64::new(0.0, 0.0);
            acc.push(running);
            for inc in increments {
                running += inc?;
                acc.push(running);
            }
            table.cumulative.push(acc);
        }
        Ok(table)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn factors(&self) -> u32 {
        self.factors
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_max
    }

    /// `∫_a^b V_level(w) w^{1/d-1} dw` for `0 ≤ a < b`.
    fn cell_integral(&self, level: u32, a: f64, b: f64) -> Result<Complex64> {
        let d = self.degree as f64;
        // e(w) carries a phase rounding error of about 2π·ulp(w); asking for
        // less than that makes the bisection run to the panel budget
        let tol = CELL_TOL.max(8.0 * PI * f64::EPSILON * b * (b - a));
        if a == 0.0 && self.degree > 1 {
            // w = v^d removes the endpoint singularity
            let top = b.powf(1.0 / d);
            let est = integrate(
                |v| self.level_value(level, v.powi(self.degree as i32)),
                0.0,
                top,
                tol,
                MAX_PANELS,
            )?;
            return Ok(est.value * d);
        }
        let inv = 1.0 / d - 1.0;
        let est = integrate(
            |w| self.level_value(level, w) * w.powf(inv),
            a,
            b,
            tol,
            MAX_PANELS,
        )?;
        Ok(est.value)
    }

    /// `V_level(β)` for `β ≥ 0`, assuming lower levels are tabulated.
    fn level_value(&self, level: u32, beta: f64) -> Complex64 {
        if level == 0 {
            return e(beta);
        }
        if beta == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        if level == 1 && self.degree == 1 {
            return v1_linear(beta);
        }
        let d = self.degree as f64;
        let prev = level - 1;
        if beta < CELL {
            // V_l(β) = ∫_0^1 V_{l-1}(β t^d) dt, smooth for small β
            let est = integrate(
                |t| self.level_value(prev, beta * t.powi(self.degree as i32)),
                0.0,
                1.0,
                CELL_TOL,
                MAX_PANELS,
            )
            .expect("smooth integrand on a short range");
            return est.value;
        }
        let i = ((beta / CELL).floor() as usize).min(self.cumulative[prev as usize].len() - 1);
        let base = self.cumulative[prev as usize][i];
        let start = i as f64 * CELL;
        let tail = if beta > start {
            self.cell_integral(prev, start, beta)
                .expect("smooth integrand on a short range")
        } else {
            Complex64::new(0.0, 0.0)
        };
        (base + tail) / (d * beta.powf(1.0 / d))
    }

    /// `V_k(β)`; for `|β|` beyond the table range an error is returned.
    pub fn eval(&self, beta: f64) -> Result<Complex64> {
        if !beta.is_finite() {
            return invalid("beta must be finite");
        }
        if beta.abs() > self.beta_max + CELL {
            return invalid(format!(
                "beta {beta} outside tabulated range {}",
                self.beta_max
            ));
        }
        let v = self.level_value(self.factors, beta.abs());
        Ok(if beta < 0.0 { v.conj() } else { v })
    }
}

/// `V_1(β) = (e(β) − 1)/(2πiβ)` for `d = 1`.
pub fn v1_linear(beta: f64) -> Complex64 {
    if beta.abs() < 1e-8 {
        return Complex64::new(1.0, PI * beta);
    }
    let x = PI * beta;
    // (e(β) − 1)/(2πiβ) = e(β/2)·sin(πβ)/(πβ)
    let sinc = x.sin() / x;
    e(beta / 2.0) * sinc
}

/// `V_k(β)` computed once; builds a table covering `|β|`.
pub fn v_k(beta: f64, degree: u32, factors: u32) -> Result<Complex64> {
    OscillatoryTable::new(degree, factors, beta.abs())?.eval(beta)
}

/// `v_k(β, X) = ⟨X⟩ V_k(⟨X⟩^d β)`.
pub fn oscillatory_v(beta: f64, degree: u32, bounds: &BoxBounds) -> Result<Complex64> {
    let p = bounds.volume();
    let arg = p.powi(degree as i32) * beta;
    Ok(v_k(arg, degree, bounds.dim() as u32)? * p)
}

/// `V_k(β)` by literally nesting `∫_0^1 V_{k-1}(β t^d) dt`, with `V_1` also
/// by quadrature. Slow; independent of the tabulated route.
pub fn v_k_nested(beta: f64, degree: u32, factors: u32, abs_tol: f64) -> Result<Complex64> {
    if degree == 0 || factors == 0 {
        return invalid("degree and factor count must be positive");
    }
    fn level(beta: f64, d: u32, l: u32, tol: f64) -> Result<Complex64> {
        if l == 0 {
            return Ok(e(beta));
        }
        let inner = |t: f64| level(beta * t.powi(d as i32), d, l - 1, tol).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let est = integrate(inner, 0.0, 1.0, tol, 20_000)?;
        if !est.value.re.is_finite() {
            return Err(crate::Error::Quadrature {
                achieved: f64::INFINITY,
                requested: tol,
            });
        }
        Ok(est.value)
    }
    level(beta, degree, factors, abs_tol)
}
