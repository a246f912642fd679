//! Small number-theoretic and floating-point helpers shared by every module.

use std::f64::consts::PI;

use num_complex::Complex64;

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a as i128
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Gcd of a slice; zero for an empty or all-zero slice.
pub fn gcd_slice(xs: &[i64]) -> u64 {
    let mut g = 0u64;
    for &x in xs {
        g = gcd_u64(g, x.unsigned_abs());
        if g == 1 {
            break;
        }
    }
    g
}

/// Extended Euclid: returns (g, u) with u*a ≡ g (mod m).
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m))
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Möbius function on `0..=n` (index 0 unused, set to 0).
pub fn mobius_sieve(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    if n == 0 {
        mu[0] = 0;
        return mu;
    }
    mu[0] = 0;
    let mut is_comp = vec![false; n + 1];
    for p in 2..=n {
        if is_comp[p] {
            continue;
        }
        for m in (p..=n).step_by(p) {
            if m > p {
                is_comp[m] = true;
            }
            mu[m] = -mu[m];
        }
        let sq = p.saturating_mul(p);
        if sq <= n {
            for m in (sq..=n).step_by(sq) {
                mu[m] = 0;
            }
        }
    }
    mu
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2;
    while p * p <= n {
        if sieve[p] {
            for m in (p * p..=n).step_by(p) {
                sieve[m] = false;
            }
        }
        p += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i as u64))
        .collect()
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Prime factorisation by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: i128, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Exact integer `d`-th root of `r >= 0` if one exists.
pub fn exact_root(r: i128, d: u32) -> Option<i128> {
    if r < 0 {
        return None;
    }
    if d == 1 || r < 2 {
        return Some(r);
    }
    let mut guess = (r as f64).powf(1.0 / d as f64).round() as i128;
    if guess < 0 {
        guess = 0;
    }
    for cand in (guess - 1).max(0)..=guess + 1 {
        let mut acc: i128 = 1;
        let mut ok = true;
        for _ in 0..d {
            match acc.checked_mul(cand) {
                Some(v) => acc = v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && acc == r {
            return Some(cand);
        }
    }
    None
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `e(x) = exp(2πix)`.
pub fn e(x: f64) -> Complex64 {
    let t = 2.0 * PI * x.rem_euclid(1.0);
    Complex64::new(t.cos(), t.sin())
}

/// `e(num/den)` with the reduction done in exact integer arithmetic.
pub fn e_frac(num: i128, den: u64) -> Complex64 {
    let r = num.rem_euclid(den as i128) as f64 / den as f64;
    e(r)
}

/// Fractional part of `alpha * m`, keeping the rounding error of the product.
pub fn frac_product(alpha: f64, m: f64) -> f64 {
    let p = alpha * m;
    let err = alpha.mul_add(m, -p);
    (p - p.floor() + err).rem_euclid(1.0)
}

/// Riemann zeta for real `s > 1` by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta pole or divergent region: s = {s}");
    const N: usize = 12;
    // B_{2j}/(2j)!
    const BERN: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let n = N as f64;
    let mut head = NeumaierSum::default();
    for i in 1..N {
        head.add((i as f64).powf(-s));
    }
    head.add(n.powf(1.0 - s) / (s - 1.0));
    head.add(0.5 * n.powf(-s));
    // rising product s(s+1)...(s+2j-2) times N^{-s-2j+1}
    let mut rising = s;
    let mut npow = n.powf(-s - 1.0);
    for (j, b) in BERN.iter().enumerate() {
        head.add(b * rising * npow);
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        npow /= n * n;
    }
    head.value()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated complex sum, componentwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}
