use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use hyperspike::forms::BoxBounds;
use hyperspike::weyl::{
    complete_sum, moment_integral, moment_quadrature, normalized_complete_sum, reduce_fraction,
    weyl_sum, weyl_sum_direct, OscillatoryTable,
};

fn bx(v: &[u64]) -> BoxBounds {
    BoxBounds::new(v.iter().map(|&x| x as f64).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trivial_bound_with_equality_at_zero(
        d in 1u32..=3,
        x in prop::collection::vec(1u64..=12, 1..=3),
        alpha in -2.0f64..2.0,
    ) {
        let b = bx(&x);
        let vol = b.volume();
        prop_assert!(weyl_sum(alpha, d, &b).unwrap().norm() <= vol * (1.0 + 1e-12));
        let at_zero = weyl_sum(0.0, d, &b).unwrap();
        prop_assert!((at_zero.re - vol).abs() < 1e-9 && at_zero.im.abs() < 1e-9);
    }

    #[test]
    fn dyadic_periodicity_and_conjugation(
        d in 1u32..=3,
        x in prop::collection::vec(1u64..=10, 1..=2),
        num in -4096i64..4096,
        shift in -3i64..=3,
    ) {
        let b = bx(&x);
        let alpha = num as f64 / 1024.0;
        let f = weyl_sum(alpha, d, &b).unwrap();
        let shifted = weyl_sum(alpha + shift as f64, d, &b).unwrap();
        prop_assert!((f - shifted).norm() < 1e-9);
        let neg = weyl_sum(-alpha, d, &b).unwrap();
        prop_assert!((f.conj() - neg).norm() < 1e-9);
        prop_assert!((f - weyl_sum_direct(alpha, d, &b)).norm() < 1e-8);
    }

    #[test]
    fn complete_sums_depend_only_on_reduced_fraction(
        d in 1u32..=3,
        k in 1usize..=2,
        a in 1i64..20,
        q in 1u64..20,
        m in 1u64..=4,
    ) {
        let (ar, qr) = reduce_fraction(a, q);
        let base = normalized_complete_sum(qr, ar, d, k).unwrap();
        let scaled = normalized_complete_sum(q * m, a * m as i64, d, k).unwrap();
        prop_assert!((base - scaled).norm() < 1e-9);
        let raw = complete_sum(q * m, a * m as i64, d, k).unwrap();
        prop_assert!(raw.norm() <= ((q * m) as f64).powi(k as i32) * (1.0 + 1e-12));
    }
}

#[test]
fn moment_routes_agree() {
    for (d, x, power) in [(1, vec![6u64, 5], 4), (2, vec![7], 4), (2, vec![4, 3], 2), (3, vec![5], 6)] {
        let b = bx(&x);
        let exact = moment_integral(d, &b, power).unwrap().to_f64().unwrap();
        let quad = moment_quadrature(d, &b, power).unwrap();
        assert!((exact - quad).abs() <= 1e-9 * exact, "{d} {x:?} {power}: {exact} vs {quad}");
    }
}

/// `|V_k(β)|·|β|^{1/d} / (1 + log|β|)^{k−1}` stays below 10 on `[3, 10⁶]`.
#[test]
fn oscillatory_integral_decay_constant() {
    let top: f64 = 1e6;
    let betas: Vec<f64> = (0..=80).map(|i| 3.0 * (top / 3.0).powf(i as f64 / 80.0)).collect();
    for (d, k) in [(1u32, 1u32), (1, 2), (2, 1), (2, 2)] {
        let table = OscillatoryTable::new(d, k, top).unwrap();
        let worst = betas
            .iter()
            .map(|&b| {
                let v = table.eval(b).unwrap().norm();
                v * b.powf(1.0 / d as f64) / (1.0 + b.ln()).powi(k as i32 - 1)
            })
            .fold(0.0, f64::max);
        assert!(worst <= 10.0, "d={d} k={k}: {worst}");
    }
}

/// `∫|f_k|^{n₀}` against `⟨X⟩^{n₀−d+0.3}` on small cubes.
#[test]
fn hua_type_moment_comparison() {
    for (d, k, n0) in [(1u32, 1usize, 2u32), (1, 2, 2), (2, 1, 4), (2, 2, 4)] {
        let mut ratios = Vec::new();
        for x in [2u64, 4, 8, 16] {
            let b = bx(&vec![x; k]);
            let m: BigUint = moment_integral(d, &b, n0).unwrap();
            let scale = b.volume().powf(n0 as f64 - d as f64 + 0.3);
            ratios.push(m.to_f64().unwrap() / scale);
        }
        let fitted = ratios.iter().copied().fold(0.0, f64::max);
        assert!(fitted <= 10.0, "d={d} k={k}: {ratios:?}");
    }
}
