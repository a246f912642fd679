use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use hyperspike::hyperbola::{
    geometric_identity_check, pinned_decomposition, sandwich_bounds, upsilon, v_kj, v_kj_numeric,
    weighted_mean_sum, weighted_mean_sum_direct, FamilyParams, FnOracle, Ones, Permuted,
};

/// Integer valued, nonnegative and deliberately asymmetric in its coordinates.
fn lumpy(x: &[u64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, &v)| ((v * (2 * i as u64 + 3)) % 5) as f64)
        .sum::<f64>()
        + 1.0
}

fn perms(k: usize) -> Vec<Vec<usize>> {
    match k {
        1 => vec![vec![0]],
        2 => vec![vec![1, 0]],
        _ => vec![vec![1, 2, 0], vec![2, 0, 1], vec![0, 2, 1]],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn geometric_identity_holds_exactly(
        k in 1u32..=4,
        j in 1u32..=12,
        num in -12i64..=12,
        den in 1i64..=7,
    ) {
        let t = BigRational::new(BigInt::from(num), BigInt::from(den));
        let (lhs, rhs) = geometric_identity_check(k, j, &t);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pinned_subsets_rebuild_the_sum(k in 1usize..=3, n in 1u64..=400) {
        let h = FnOracle::new(k, FamilyParams::divisor(), true, lumpy);
        let (full, split) = pinned_decomposition(&h, n).unwrap();
        prop_assert_eq!(full.exact, split.exact);
        prop_assert!(full.exact.is_some());
    }

    #[test]
    fn invariant_under_coordinate_permutations(k in 1usize..=3, n in 2u64..=300, pick in 0usize..3) {
        let h = FnOracle::new(k, FamilyParams::divisor(), true, lumpy);
        let all = perms(k);
        let p = Permuted::new(&h, all[pick % all.len()].clone()).unwrap();
        prop_assert_eq!(upsilon(&h, n, None).unwrap().exact, upsilon(&p, n, None).unwrap().exact);
        let x = (n as f64).powf(1.0 / k as f64).ceil().max(2.0) as u64;
        let a = weighted_mean_sum(&h, x, 1).unwrap();
        let b = weighted_mean_sum(&p, x, 1).unwrap();
        prop_assert!((a.sum - b.sum).abs() <= 1e-9 * a.sum.abs().max(1.0));
    }

    #[test]
    fn sandwich_encloses_the_restricted_sum(
        k in 1usize..=2,
        n in 200u64..=5000,
        w1 in 1u64..=6,
        w2 in 1u64..=6,
        steps in 2u32..=8,
    ) {
        let w = [w1 as f64, w2 as f64];
        let w = &w[..k];
        prop_assume!(w.iter().product::<f64>() < n as f64);
        let steps = steps.max(k as u32);
        let ones = Ones { k };
        let lumpy_h = FnOracle::new(k, FamilyParams::divisor(), true, lumpy);
        let exact = upsilon(&ones, n, Some(w)).unwrap().value;
        let s = sandwich_bounds(&ones, n as f64, w, Some(steps)).unwrap();
        prop_assert!(s.lower <= exact + 1e-9 && exact <= s.upper + 1e-9, "{:?} {}", s, exact);
        let exact = upsilon(&lumpy_h, n, Some(w)).unwrap().value;
        let s = sandwich_bounds(&lumpy_h, n as f64, w, Some(steps)).unwrap();
        prop_assert!(s.lower <= exact + 1e-9 && exact <= s.upper + 1e-9, "{:?} {}", s, exact);
    }
}

#[test]
fn weighted_mean_routes_agree() {
    for k in 1..=3 {
        let ones = Ones { k };
        for (x, j) in [(12u64, 0u32), (20, 1), (9, 3)] {
            let fast = weighted_mean_sum(&ones, x, j).unwrap();
            let direct = weighted_mean_sum_direct(&ones, x, j).unwrap();
            assert!((fast.sum - direct.sum).abs() <= 1e-9 * direct.sum.abs(), "k={k} x={x} j={j}");
        }
    }
}

#[test]
fn closed_form_coefficients_match_quadrature() {
    for k in 1..=4 {
        for j in 0..=4 {
            let exact = v_kj(k, j).to_f64().unwrap();
            assert!((exact - v_kj_numeric(k, j)).abs() <= 1e-9, "k={k} j={j}");
        }
    }
}
