use num_traits::ToPrimitive;
use proptest::prelude::*;

use hyperspike::forms::DiagonalForm;
use hyperspike::local::{
    assemble_density, congruence_count, singular_integral_positive, t_term, truncated_singular_series,
    TruncationParams,
};

fn coeff() -> impl Strategy<Value = i64> {
    prop_oneof![-4i64..=-1, 1i64..=4]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prime_power_partial_sums(
        d in 1u32..=3,
        k in 1usize..=2,
        c in prop::collection::vec(coeff(), 2..=4),
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
        l in 1u32..=3,
    ) {
        let f = DiagonalForm::new(d, k, c.clone()).unwrap();
        let ks = (k * c.len()) as f64;
        let mut sum = 0.0;
        let mut q = 1u64;
        for _ in 0..=l {
            sum += t_term(&f, q).unwrap();
            q *= p;
        }
        let top = p.pow(l);
        let phi = congruence_count(&f, top).unwrap().to_f64().unwrap();
        let rhs = (top as f64).powf(1.0 - ks) * phi;
        prop_assert!(close(sum, rhs, 1e-9), "{} vs {}", sum, rhs);
    }

    #[test]
    fn multiplicative_in_the_modulus(
        d in 1u32..=3,
        k in 1usize..=2,
        c in prop::collection::vec(coeff(), 2..=4),
        q1 in 2u64..=50,
        q2 in 2u64..=50,
    ) {
        prop_assume!(gcd(q1, q2) == 1);
        let f = DiagonalForm::new(d, k, c).unwrap();
        let joint = t_term(&f, q1 * q2).unwrap();
        let split = t_term(&f, q1).unwrap() * t_term(&f, q2).unwrap();
        prop_assert!((joint - split).abs() <= 1e-9, "{} vs {}", joint, split);
    }

    #[test]
    fn odd_degree_series_ignores_signs(
        d in prop::sample::select(vec![1u32, 3]),
        k in 1usize..=2,
        c in prop::collection::vec(coeff(), 3..=4),
        mask in 0u32..16,
    ) {
        let f = DiagonalForm::new(d, k, c.clone()).unwrap();
        let flipped: Vec<i64> = c.iter().enumerate().map(|(j, &v)| if mask >> j & 1 == 1 { -v } else { v }).collect();
        let g = DiagonalForm::new(d, k, flipped).unwrap();
        let a = truncated_singular_series(&f, 40).unwrap();
        let b = truncated_singular_series(&g, 40).unwrap();
        for (x, y) in a.terms.iter().zip(&b.terms) {
            prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Scaling every coefficient leaves the solution set, hence `𝔖·I⁺`, unchanged.
    #[test]
    fn density_invariant_under_common_factor(
        c in prop::collection::vec(coeff(), 3..=4),
        m in 2i64..=3,
    ) {
        prop_assume!(c.iter().any(|&v| v > 0) && c.iter().any(|&v| v < 0));
        let params = TruncationParams { w_series: 64, l_max: 2, w_integral: 1024.0, prime_cutoff: 5 };
        let f = DiagonalForm::new(1, 1, c.clone()).unwrap();
        let g = DiagonalForm::new(1, 1, c.iter().map(|v| v * m).collect()).unwrap();
        let a = assemble_density(&f, &params).unwrap();
        let b = assemble_density(&g, &params).unwrap();
        prop_assert!(close(a.e_plus, b.e_plus, 1e-6), "{} vs {}", a.e_plus, b.e_plus);
        prop_assert!(close(a.e_full, b.e_full, 1e-6), "{} vs {}", a.e_full, b.e_full);
    }
}

#[test]
fn common_factor_example() {
    let params = TruncationParams { w_series: 64, l_max: 2, w_integral: 1024.0, prime_cutoff: 5 };
    let a = assemble_density(&DiagonalForm::new(1, 1, vec![1, 1, -2]).unwrap(), &params).unwrap();
    let b = assemble_density(&DiagonalForm::new(1, 1, vec![2, 2, -4]).unwrap(), &params).unwrap();
    assert!(close(a.sigma_series * a.i_plus.extrapolated, 0.5, 1e-6));
    assert!(close(b.sigma_series * b.i_plus.extrapolated, 0.5, 1e-6));
}

/// `I⁺ ≥ −tol` on every form and `I⁺ > 0` once signs are mixed and `s > 2d`.
#[test]
fn positive_singular_integral_battery() {
    let battery: &[(u32, usize, &[i64], f64)] = &[
        (1, 1, &[1, 1, -2], 512.0),
        (1, 1, &[1, 2, 3], 512.0),
        (1, 1, &[3, -1, -1, 2], 512.0),
        (1, 2, &[1, 1, -1], 256.0),
        (1, 2, &[2, -1, -1, 1], 256.0),
        (2, 1, &[1, 1, 1, 1, -1], 128.0),
        (2, 1, &[1, 2, -1, -2, 1], 128.0),
        (2, 1, &[1, 1, 1, 1, 1], 128.0),
        (3, 1, &[1, 1, 1, 1, 1, 1, -1], 64.0),
    ];
    for &(d, k, c, w) in battery {
        let f = DiagonalForm::new(d, k, c.to_vec()).unwrap();
        let i = singular_integral_positive(&f, w).unwrap();
        let tol = 1e-6 + 10.0 * i.tail_estimate;
        assert!(i.extrapolated >= -tol, "{c:?}: {i:?}");
        let mixed = c.iter().any(|&v| v > 0) && c.iter().any(|&v| v < 0);
        if mixed && c.len() > 2 * d as usize {
            assert!(i.extrapolated > tol, "{c:?}: {i:?}");
        }
    }
}
