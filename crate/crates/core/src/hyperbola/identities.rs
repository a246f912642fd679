use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::NeumaierSum;
use crate::weyl::quadrature::kronrod_rule;

/// `p_k(t) = Σ_{l<k} (−1)^{k+1+l} t^l / l!`.
pub fn p_k_eval(k: u32, t: f64) -> f64 {
    assert!(k >= 1, "p_k needs k >= 1");
    let mut sum = NeumaierSum::default();
    let mut term = 1.0;
    for l in 0..k {
        if l > 0 {
            term *= t / l as f64;
        }
        let sign = if (k + 1 + l).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum.add(sign * term);
    }
    sum.value()
}

fn binomial(n: u64, r: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Both sides of the truncated geometric identity
/// `(1−t)^k Σ_{|j|₁ ≤ J} t^{|j|₁} = 1 − t^{J+1} Σ_{l<k} C(J+l, l)(1−t)^l`.
///
/// The left side walks every `j ∈ N_0^k` with `|j|₁ ≤ J` explicitly.
pub fn geometric_identity_check(k: u32, big_j: u32, t: &BigRational) -> (BigRational, BigRational) {
    assert!(k >= 1 && big_j >= 1, "k and J must be positive");
    let one = BigRational::one();
    let powers: Vec<BigRational> = (0..=big_j)
        .scan(one.clone(), |acc, _| {
            let cur = acc.clone();
            *acc = &*acc * t;
            Some(cur)
        })
        .collect();

    let mut sum = BigRational::zero();
    let mut j = vec![0u32; k as usize];
    loop {
        let total: u32 = j.iter().sum();
        sum += &powers[total as usize];
        // advance to the next tuple with |j|₁ ≤ J
        let mut i = 0;
        loop {
            if i == j.len() {
                let lhs = num_traits::pow(&one - t, k as usize) * sum;
                let rhs = rhs_of(k, big_j, t);
                return (lhs, rhs);
            }
            j[i] += 1;
            if j.iter().sum::<u32>() <= big_j {
                break;
            }
            j[i] = 0;
            i += 1;
        }
    }
}

fn rhs_of(k: u32, big_j: u32, t: &BigRational) -> BigRational {
    let one = BigRational::one();
    let u = &one - t;
    let mut inner = BigRational::zero();
    let mut u_pow = one.clone();
    for l in 0..k {
        inner += BigRational::from_integer(binomial((big_j + l) as u64, l as u64)) * &u_pow;
        u_pow *= &u;
    }
    one - num_traits::pow(t.clone(), big_j as usize + 1) * inner
}

/// `V_{k,j} = Σ_{a₁+..+a_k=j} j!/Π a_i! · Π 1/(a_i+1)`, which simplifies
/// to `j!/Π (a_i+1)!`.
pub fn v_kj(k: u32, j: u32) -> BigRational {
    assert!(k >= 1, "V_{{k,j}} needs k >= 1");
    let fact = |n: u32| (1..=n as u64).fold(BigInt::one(), |acc, i| acc * i);
    let mut total = BigRational::zero();
    let mut a = vec![0u32; k as usize];
    loop {
        if a.iter().sum::<u32>() == j {
            let den = a.iter().fold(BigInt::one(), |acc, &ai| acc * fact(ai + 1));
            total += BigRational::new(fact(j), den);
        }
        let mut i = 0;
        loop {
            if i == a.len() {
                return total;
            }
            a[i] += 1;
            if a[i] <= j {
                break;
            }
            a[i] = 0;
            i += 1;
        }
    }
}

/// `∫_{[0,1]^k} (ξ₁+..+ξ_k)^j dξ` by a tensor Kronrod rule, exact for
/// polynomial degree far beyond the range used here.
pub fn v_kj_numeric(k: u32, j: u32) -> f64 {
    let rule = kronrod_rule(0.0, 1.0);
    let k = k as usize;
    let mut idx = vec![0usize; k];
    let mut sum = NeumaierSum::default();
    loop {
        let (mut x, mut w) = (0.0, 1.0);
        for &i in &idx {
            x += rule[i].0;
            w *= rule[i].1;
        }
        sum.add(w * x.powi(j as i32));
        let mut i = 0;
        loop {
            if i == k {
                return sum.value();
            }
            idx[i] += 1;
            if idx[i] < rule.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// `α^k c_h V_{k,j}`, the leading coefficient of the weighted mean sum.
pub fn weighted_mean_target(alpha: f64, c_h: f64, k: u32, j: u32) -> f64 {
    let v = v_kj(k, j);
    let v = rational_to_f64(&v);
    alpha.powi(k as i32) * c_h * v
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn p_k_examples() {
        for t in [-3.0, 0.0, 2.5] {
            assert_eq!(p_k_eval(1, t), 1.0);
        }
        assert_eq!(p_k_eval(2, 0.0), -1.0);
        assert_eq!(p_k_eval(3, 2.0), 1.0);
        assert_eq!(p_k_eval(2, 5.0), 4.0);
    }

    #[test]
    fn geometric_identity_examples() {
        let half = q(1, 2);
        for big_j in 1..6 {
            let (l, r) = geometric_identity_check(1, big_j, &half);
            let expect = BigRational::one() - num_traits::pow(half.clone(), big_j as usize + 1);
            assert_eq!(l, expect);
            assert_eq!(r, expect);
        }
        let (l, r) = geometric_identity_check(2, 1, &q(2, 1));
        assert_eq!((l, r), (q(5, 1), q(5, 1)));
        let (l, r) = geometric_identity_check(3, 4, &q(1, 1));
        assert_eq!((l, r), (q(0, 1), q(0, 1)));
    }

    #[test]
    fn v_kj_examples() {
        for k in 1..5 {
            assert_eq!(v_kj(k, 0), q(1, 1));
        }
        for j in 0..6 {
            assert_eq!(v_kj(1, j), q(1, j as i64 + 1));
        }
        assert_eq!(v_kj(2, 1), q(1, 1));
        // ∫∫(x+y)² = 7/6
        assert_eq!(v_kj(2, 2), q(7, 6));
    }

    #[test]
    fn v_kj_numeric_agrees() {
        for k in 1..=3 {
            for j in 0..=4 {
                let exact = rational_to_f64(&v_kj(k, j));
                assert!((exact - v_kj_numeric(k, j)).abs() < 1e-12, "k={k} j={j}");
            }
        }
    }
}
