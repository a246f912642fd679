use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::oscillatory::oscillatory_v;
use super::sums::{box_error_term, complete_sum, weyl_sum};
use crate::arith::gcd;
use crate::error::{invalid, Result};
use crate::forms::BoxBounds;

const EXHAUSTIVE_LIMIT: u64 = 10_000;

/// `α = a/q + β` with `gcd(a, q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalApprox {
    pub a: i64,
    pub q: u64,
    pub beta: f64,
}

impl RationalApprox {
    /// Normalizes `a/q` to lowest terms.
    pub fn new(a: i64, q: u64, beta: f64) -> Result<Self> {
        if q == 0 {
            return invalid("denominator must be positive");
        }
        let g = gcd(a as i128, q as i128) as i64;
        Ok(Self {
            a: a / g,
            q: q / g as u64,
            beta,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.a as f64 / self.q as f64 + self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ArcTag {
    Major(RationalApprox),
    Minor,
}

/// Outcome of [`classify_arc`] with the dissection parameters `Q` and `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcLabel {
    pub tag: ArcTag,
    pub q_max: f64,
    pub p: f64,
}

impl ArcLabel {
    pub fn is_major(&self) -> bool {
        matches!(self.tag, ArcTag::Major(_))
    }
}

fn test_denominator(alpha: f64, q: u64, width: f64) -> Option<RationalApprox> {
    let qa = q as f64 * alpha;
    let a = qa.round();
    if (qa - a).abs() <= width {
        let a = a as i64;
        Some(RationalApprox {
            a,
            q,
            beta: alpha - a as f64 / q as f64,
        })
    } else {
        None
    }
}

/// Continued-fraction convergent denominators of `alpha` up to `limit`.
fn convergents(alpha: f64, limit: f64) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut q_prev, mut q_cur) = (0u64, 1u64);
    let mut x = alpha - alpha.floor();
    for _ in 0..64 {
        if x.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / x;
        let a = inv.floor();
        if a > 1e18 {
            break;
        }
        let q_next = match (a as u64).checked_mul(q_cur).and_then(|v| v.checked_add(q_prev)) {
            Some(v) => v,
            None => break,
        };
        if q_next as f64 > limit {
            break;
        }
        out.push(q_next);
        q_prev = q_cur;
        q_cur = q_next;
        x = inv - a;
    }
    out
}

/// Decide whether `α` lies on a major arc `|qα − a| ≤ Q P^{-d}` with `q ≤ Q`.
///
/// The smallest admissible `q` is returned, which makes `a/q` reduced.
/// Denominators up to `10^4` are scanned; beyond that only continued-fraction
/// convergents are tried.
pub fn classify_arc(alpha: f64, q_max: f64, p: f64, degree: u32) -> Result<ArcLabel> {
    if !alpha.is_finite() || !(q_max >= 1.0) || !(p >= 1.0) {
        return invalid("need finite alpha, Q ≥ 1 and P ≥ 1");
    }
    if q_max.powi(degree as i32) > p {
        log::warn!("Q = {q_max} is large relative to P = {p}; arcs may overlap");
    }
    let width = q_max * p.powi(-(degree as i32));
    let top = q_max.floor() as u64;
    let mut tag = ArcTag::Minor;
    for q in 1..=top.min(EXHAUSTIVE_LIMIT) {
        if let Some(r) = test_denominator(alpha, q, width) {
            tag = ArcTag::Major(r);
            break;
        }
    }
    if tag == ArcTag::Minor && top > EXHAUSTIVE_LIMIT {
        for q in convergents(alpha, q_max) {
            if q <= EXHAUSTIVE_LIMIT {
                continue;
            }
            if let Some(r) = test_denominator(alpha, q, width) {
                tag = ArcTag::Major(r);
                break;
            }
        }
    }
    Ok(ArcLabel { tag, q_max, p })
}

/// The major-arc approximation `f ≈ q^{-k} S(q,a) v(β)` and its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorArcResidual {
    pub exact: Complex64,
    pub approx: Complex64,
    pub residual: f64,
    /// `E(q, X)(1 + ⟨X⟩^d |β|)^k`
    pub bound: f64,
}

impl MajorArcResidual {
    pub fn ratio(&self) -> f64 {
        self.residual / self.bound
    }
}

pub fn major_arc_residual(
    label: &ArcLabel,
    degree: u32,
    bounds: &BoxBounds,
) -> Result<MajorArcResidual> {
    let r = match label.tag {
        ArcTag::Major(r) => r,
        ArcTag::Minor => return invalid("major arc approximation requested on a minor arc"),
    };
    let k = bounds.dim();
    let exact = weyl_sum(r.alpha(), degree, bounds)?;
    let s = complete_sum(r.q, r.a, degree, k)? / (r.q as f64).powi(k as i32);
    let approx = s * oscillatory_v(r.beta, degree, bounds)?;
    let scale = bounds.volume().powi(degree as i32) * r.beta.abs();
    let bound = box_error_term(r.q, bounds) * (1.0 + scale).powi(k as i32);
    Ok(MajorArcResidual {
        exact,
        approx,
        residual: (exact - approx).norm(),
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        let l = classify_arc(0.5, 3.0, 100.0, 1).unwrap();
        assert_eq!(l.tag, ArcTag::Major(RationalApprox { a: 1, q: 2, beta: 0.0 }));
        let l = classify_arc(0.25, 2.0, 1000.0, 1).unwrap();
        assert_eq!(l.tag, ArcTag::Minor);
        for q_max in [1.0, 5.0, 40.0] {
            let l = classify_arc(0.0, q_max, 10.0, 2).unwrap();
            assert_eq!(l.tag, ArcTag::Major(RationalApprox { a: 0, q: 1, beta: 0.0 }));
        }
    }

    #[test]
    fn smallest_denominator_is_reduced() {
        let l = classify_arc(2.0 / 6.0 + 1e-9, 10.0, 1e4, 1).unwrap();
        match l.tag {
            ArcTag::Major(r) => assert_eq!((r.a, r.q), (1, 3)),
            ArcTag::Minor => panic!("expected major arc"),
        }
    }

    #[test]
    fn convergents_reach_large_denominators() {
        let alpha = 355.0 / 113.0 - 3.0;
        let qs = convergents(alpha, 1e6);
        assert!(qs.contains(&113));
        let p: f64 = 1e9;
        let label = classify_arc(12345.0 / 54321.0, 60000.0, p, 1).unwrap();
        assert!(label.is_major());
    }

    #[test]
    fn minor_rejected_for_residual() {
        let l = classify_arc(0.25, 2.0, 1000.0, 1).unwrap();
        let b = BoxBounds::new(vec![5.0]).unwrap();
        assert!(major_arc_residual(&l, 1, &b).is_err());
    }

    #[test]
    fn trivial_arc_residual() {
        let b = BoxBounds::new(vec![7.5, 3.0]).unwrap();
        let l = classify_arc(0.0, 1.0, b.volume(), 1).unwrap();
        let r = major_arc_residual(&l, 1, &b).unwrap();
        assert!((r.approx.re - 22.5).abs() < 1e-12);
        assert!((r.exact.re - 21.0).abs() < 1e-12);
        assert!(r.residual <= r.bound);
    }

    #[test]
    fn gauss_sum_arc() {
        let b = BoxBounds::new(vec![100.0]).unwrap();
        let label = ArcLabel {
            tag: ArcTag::Major(RationalApprox::new(1, 4, 0.0).unwrap()),
            q_max: 4.0,
            p: 100.0,
        };
        let r = major_arc_residual(&label, 2, &b).unwrap();
        assert!((r.approx - Complex64::new(50.0, 50.0)).norm() < 1e-9);
        assert!(r.residual <= 4.0 * r.bound);
    }
}
