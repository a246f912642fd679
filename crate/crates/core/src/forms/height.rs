//! Primitive solutions ordered by the multiprojective anticanonical height.
//!
//! A rational point of the variety is represented by `k` primitive integer
//! vectors `x_1..x_k ∈ Z^{n+1}`, one per projective factor, each determined
//! up to sign. Only points with every coordinate nonzero are counted.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::counting::count_box_primitive;
use super::{BoxBounds, Variety};
use crate::arith::{exact_root, gcd, gcd_slice, mod_inverse};
use crate::error::{invalid, Error, Result};

/// Largest integer `t` with `t^alpha ≤ ⌊B⌋`.
pub fn height_threshold(b: f64, alpha: i64) -> Result<u64> {
    if !b.is_finite() || b < 1.0 {
        return invalid("height bound must be finite and at least 1");
    }
    if alpha < 1 {
        return invalid(format!("height exponent must be at least 1, got {alpha}"));
    }
    let b = b.floor() as u128;
    let fits = |t: u64| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..alpha {
            acc = match acc.checked_mul(t as u128) {
                Some(v) if v <= b => v,
                _ => return false,
            };
        }
        true
    };
    let mut t = (b as f64).powf(1.0 / alpha as f64).floor() as u64;
    while t > 1 && !fits(t) {
        t -= 1;
    }
    while fits(t + 1) {
        t += 1;
    }
    Ok(t.max(1))
}

fn check_norms(variety: &Variety, m: &[u64]) -> Result<()> {
    if m.len() != variety.form().factors() {
        return invalid("norm vector length must equal the factor count");
    }
    if m.contains(&0) {
        return invalid("norms must be positive");
    }
    Ok(())
}

/// `θ(m)`: tuples of primitive vectors with nonzero coordinates and sup-norms
/// exactly `m`, solving the equation. Computed by inclusion–exclusion over
/// `Θ(X) = M*_a(X)`, the primitive box count.
pub fn theta(variety: &Variety, m: &[u64]) -> Result<BigUint> {
    check_norms(variety, m)?;
    let k = m.len();
    let mut pos = BigUint::zero();
    let mut neg = BigUint::zero();
    for subset in 0u32..(1 << k) {
        let sides: Vec<u64> = (0..k)
            .map(|i| if subset >> i & 1 == 1 { m[i] - 1 } else { m[i] })
            .collect();
        if sides.contains(&0) {
            continue;
        }
        let big_theta = count_box_primitive(variety.form(), &BoxBounds::from_floors(&sides))?;
        if subset.count_ones() % 2 == 0 {
            pos += big_theta;
        } else {
            neg += big_theta;
        }
    }
    if neg > pos {
        return Err(Error::Consistency("negative inclusion–exclusion for θ".into()));
    }
    Ok(pos - neg)
}

/// All primitive vectors of length `len` with nonzero coordinates and sup-norm
/// exactly `m`. With `first_positive`, only vectors whose first coordinate
/// is positive.
fn shell_vectors(len: usize, m: i64, first_positive: bool) -> Vec<Vec<i64>> {
    let coords: Vec<i64> = (-m..=m).filter(|&v| v != 0).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; len];
    loop {
        let v: Vec<i64> = idx.iter().map(|&i| coords[i]).collect();
        let on_shell = v.iter().any(|x| x.abs() == m);
        if on_shell && (!first_positive || v[0] > 0) && gcd_slice(&v) == 1 {
            out.push(v);
        }
        let mut j = 0;
        loop {
            if j == len {
                return out;
            }
            idx[j] += 1;
            if idx[j] < coords.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// `θ(m)` by direct enumeration of the shells.
pub fn theta_direct(variety: &Variety, m: &[u64]) -> Result<BigUint> {
    check_norms(variety, m)?;
    let s = variety.form().terms();
    let shells: Vec<Vec<Vec<i64>>> = m.iter().map(|&mi| shell_vectors(s, mi as i64, false)).collect();
    let mut count = 0u64;
    let mut partial = vec![1i128; s];
    direct_walk(variety, &shells, 0, &mut partial, &mut |_| count += 1)?;
    Ok(BigUint::from(count))
}

fn evaluate(variety: &Variety, products: &[i128]) -> Result<i128> {
    let form = variety.form();
    let mut acc: i128 = 0;
    for (&p, &c) in products.iter().zip(form.coeffs()) {
        let term = p
            .checked_pow(form.degree())
            .and_then(|v| v.checked_mul(c as i128))
            .ok_or(Error::Overflow("height enumeration"))?;
        acc = acc.checked_add(term).ok_or(Error::Overflow("height enumeration"))?;
    }
    Ok(acc)
}

fn direct_walk(
    variety: &Variety,
    levels: &[Vec<Vec<i64>>],
    depth: usize,
    partial: &mut Vec<i128>,
    hit: &mut dyn FnMut(usize),
) -> Result<()> {
    if depth == levels.len() {
        if evaluate(variety, partial)? == 0 {
            hit(depth);
        }
        return Ok(());
    }
    let saved = partial.clone();
    for v in &levels[depth] {
        for (p, &x) in partial.iter_mut().zip(v) {
            *p *= x as i128;
        }
        direct_walk(variety, levels, depth + 1, partial, hit)?;
        partial.copy_from_slice(&saved);
    }
    Ok(())
}

/// `N(B)` by plain enumeration of primitive tuples with `Π|x_i| ≤ T`.
///
/// No symmetry reductions; intended as an oracle for small `B`.
pub fn height_count_direct(variety: &Variety, b: f64) -> Result<BigUint> {
    let t = height_threshold(b, variety.alpha())?;
    let s = variety.form().terms();
    let k = variety.form().factors();
    let shells: Vec<Vec<Vec<i64>>> = (1..=t).map(|m| shell_vectors(s, m as i64, false)).collect();
    let mut total = 0u64;
    let mut partial = vec![1i128; s];
    walk_bounded(variety, &shells, k, t, &mut partial, &mut total)?;
    if !total.is_multiple_of(1 << k) {
        return Err(Error::Consistency(format!(
            "direct primitive count {total} not divisible by 2^{k}"
        )));
    }
    Ok(BigUint::from(total >> k))
}

fn walk_bounded(
    variety: &Variety,
    shells: &[Vec<Vec<i64>>],
    remaining: usize,
    budget: u64,
    partial: &mut Vec<i128>,
    total: &mut u64,
) -> Result<()> {
    if remaining == 0 {
        if evaluate(variety, partial)? == 0 {
            *total += 1;
        }
        return Ok(());
    }
    let saved = partial.clone();
    for m in 1..=budget {
        for v in &shells[m as usize - 1] {
            for (p, &x) in partial.iter_mut().zip(v) {
                *p *= x as i128;
            }
            walk_bounded(variety, shells, remaining - 1, budget / m, partial, total)?;
            partial.copy_from_slice(&saved);
        }
    }
    Ok(())
}

/// `Σ_{Π m_i ≤ T} θ(m)`: primitive solution tuples with nonzero coordinates
/// and product of sup-norms at most `T`.
///
/// Factors are interchangeable, so only sorted norm vectors `m_1 ≤ .. ≤ m_k`
/// are visited, weighted by their number of distinct orderings. The sign of
/// `x_1` is fixed. The last vector is found by solving for one (d ≥ 2) or
/// two (d = 1) of its coordinates.
pub fn hyperbolic_solution_count(variety: &Variety, t: u64) -> Result<BigUint> {
    if t == 0 {
        return Ok(BigUint::zero());
    }
    let k = variety.form().factors();
    let s = variety.form().terms();
    if t > i64::MAX as u64 / 4 {
        return invalid("threshold too large");
    }
    if k == 1 {
        let ctx = LastVector::new(variety, t);
        let (eq, above) = ctx.count(&vec![1i128; s], 0, t, true)?;
        return Ok(BigUint::from(2 * (eq + above)));
    }
    // first vector (sign fixed) for every feasible norm m_1 with m_1^k ≤ T
    let mut starts = Vec::new();
    let mut m1 = 1u64;
    while (m1 as u128).pow(k as u32) <= t as u128 {
        for v in shell_vectors(s, m1 as i64, true) {
            starts.push((m1, v));
        }
        m1 += 1;
    }
    let ctx = LastVector::new(variety, t);
    let partials: Vec<Result<u128>> = starts
        .par_iter()
        .map(|(m1, v)| {
            let prod: Vec<i128> = v.iter().map(|&x| x as i128).collect();
            let mut norms = vec![*m1];
            ctx.prefix_walk(&mut norms, &prod, *m1)
        })
        .collect();
    let mut total: u128 = 0;
    for p in partials {
        total = total
            .checked_add(p?)
            .ok_or(Error::Overflow("hyperbolic count"))?;
    }
    Ok(BigUint::from(2 * total))
}

struct LastVector<'a> {
    variety: &'a Variety,
    t: u64,
    factorials: Vec<u128>,
}

impl<'a> LastVector<'a> {
    fn new(variety: &'a Variety, t: u64) -> Self {
        let k = variety.form().factors();
        let mut factorials = vec![1u128; k + 1];
        for i in 1..=k {
            factorials[i] = factorials[i - 1] * i as u128;
        }
        Self {
            variety,
            t,
            factorials,
        }
    }

    /// Distinct orderings of a sorted norm vector.
    fn orderings(&self, sorted: &[u64]) -> u128 {
        let mut denom = 1u128;
        let mut run = 1usize;
        for i in 1..=sorted.len() {
            if i < sorted.len() && sorted[i] == sorted[i - 1] {
                run += 1;
            } else {
                denom *= self.factorials[run];
                run = 1;
            }
        }
        self.factorials[sorted.len()] / denom
    }

    /// Walk middle vectors `x_2..x_{k-1}` with nondecreasing norms, then
    /// count the last vector.
    fn prefix_walk(&self, norms: &mut Vec<u64>, prod: &[i128], norm_prod: u64) -> Result<u128> {
        let k = self.variety.form().factors();
        let s = self.variety.form().terms();
        let last = *norms.last().expect("nonempty prefix");
        if norms.len() == k - 1 {
            let hi = self.t / norm_prod;
            if hi < last {
                return Ok(0);
            }
            let (eq, above) = self.count(prod, last, hi, false)?;
            let mut full = norms.clone();
            full.push(last);
            let w_eq = self.orderings(&full);
            let w_above = k as u128 * self.orderings(norms);
            return Ok(w_eq * eq + w_above * above);
        }
        let mut acc = 0u128;
        let mut m = last;
        // remaining factors all have norm ≥ m
        let rest = (k - norms.len()) as u32;
        while (norm_prod as u128) * (m as u128).pow(rest) <= self.t as u128 {
            for v in shell_vectors(s, m as i64, false) {
                let next: Vec<i128> = prod.iter().zip(&v).map(|(&p, &x)| p * x as i128).collect();
                norms.push(m);
                acc += self.prefix_walk(norms, &next, norm_prod * m)?;
                norms.pop();
            }
            m += 1;
        }
        Ok(acc)
    }

    /// Count last vectors `y` (primitive, nonzero coordinates, `|y| ≤ hi`)
    /// with `Σ a_j (P_j y_j)^d = 0`. Returns `(#{|y| = lo}, #{|y| > lo})`;
    /// with `lo = 0` everything lands in the second slot. With `first_positive`
    /// only `y_0 > 0` is admitted.
    fn count(&self, prod: &[i128], lo: u64, hi: u64, first_positive: bool) -> Result<(u128, u128)> {
        let form = self.variety.form();
        let d = form.degree();
        let s = form.terms();
        let coeff: Vec<i128> = prod
            .iter()
            .zip(form.coeffs())
            .map(|(&p, &c)| {
                p.checked_pow(d)
                    .and_then(|v| v.checked_mul(c as i128))
                    .ok_or(Error::Overflow("height enumeration"))
            })
            .collect::<Result<_>>()?;
        let hi = hi as i64;
        let solved = if d == 1 { 2 } else { 1 };
        let free = s - solved;
        let mut state = Scan {
            lo: lo as i64,
            hi,
            eq: 0,
            above: 0,
        };
        let mut y = vec![0i64; s];
        self.scan_free(&coeff, &mut y, 0, free, 0, first_positive, &mut state)?;
        Ok((state.eq, state.above))
    }

    #[allow(clippy::too_many_arguments)]
    fn scan_free(
        &self,
        coeff: &[i128],
        y: &mut [i64],
        pos: usize,
        free: usize,
        residual: i128,
        first_positive: bool,
        state: &mut Scan,
    ) -> Result<()> {
        let d = self.variety.form().degree();
        if pos == free {
            return if d == 1 {
                self.solve_linear(coeff, y, residual, first_positive && free == 0, state)
            } else {
                self.solve_power(coeff, y, residual, first_positive && free == 0, state)
            };
        }
        let start = if first_positive && pos == 0 { 1 } else { -state.hi };
        for v in start..=state.hi {
            if v == 0 {
                continue;
            }
            y[pos] = v;
            let term = (v as i128)
                .checked_pow(d)
                .and_then(|p| p.checked_mul(coeff[pos]))
                .and_then(|p| p.checked_add(residual))
                .ok_or(Error::Overflow("height enumeration"))?;
            self.scan_free(coeff, y, pos + 1, free, term, first_positive, state)?;
        }
        Ok(())
    }

    /// `b_u y_u + b_w y_w = -r` over the admissible window, stepping through
    /// the arithmetic progression of solutions in the coordinate whose
    /// partner coefficient is larger.
    fn solve_linear(
        &self,
        coeff: &[i128],
        y: &mut [i64],
        residual: i128,
        first_positive: bool,
        state: &mut Scan,
    ) -> Result<()> {
        let s = coeff.len();
        // iterate over `u`, solve for `w`; step is |b_w|/g, so pick |b_w| ≥ |b_u|,
        // unless the sign restriction pins position 0 as the iterated one.
        let (u, w) = if first_positive || coeff[s - 1].abs() >= coeff[s - 2].abs() {
            (s - 2, s - 1)
        } else {
            (s - 1, s - 2)
        };
        let (bu, bw) = (coeff[u], coeff[w]);
        let g = gcd(bu, bw);
        if residual % g != 0 {
            return Ok(());
        }
        let step = (bw / g).abs();
        let target = (-residual / g).rem_euclid(step);
        let inv = mod_inverse(bu / g, step).expect("coprime after division");
        let base = (target * inv).rem_euclid(step);
        let hi = state.hi as i128;
        let lo_u = if first_positive && u == 0 { 1 } else { -hi };
        // first value ≥ lo_u congruent to base mod step
        let mut yu = lo_u + (base - lo_u).rem_euclid(step);
        while yu <= hi {
            if yu != 0 {
                let rest = -residual - bu * yu;
                debug_assert_eq!(rest % bw, 0);
                let yw = rest / bw;
                if yw != 0 && yw.abs() <= hi {
                    y[u] = yu as i64;
                    y[w] = yw as i64;
                    state.record(y);
                }
            }
            yu += step;
        }
        Ok(())
    }

    fn solve_power(
        &self,
        coeff: &[i128],
        y: &mut [i64],
        residual: i128,
        first_positive: bool,
        state: &mut Scan,
    ) -> Result<()> {
        let s = coeff.len();
        let d = self.variety.form().degree();
        let b = coeff[s - 1];
        if residual % b != 0 {
            return Ok(());
        }
        let target = -residual / b;
        if target == 0 {
            return Ok(());
        }
        let root = match (d % 2, target > 0) {
            (0, false) => return Ok(()),
            _ => match exact_root(target.abs(), d) {
                Some(r) => r,
                None => return Ok(()),
            },
        };
        if root > state.hi as i128 {
            return Ok(());
        }
        let candidates: &[i128] = if d.is_multiple_of(2) {
            &[1, -1]
        } else if target > 0 {
            &[1]
        } else {
            &[-1]
        };
        for &sign in candidates {
            let v = sign * root;
            if first_positive && s == 1 && v < 0 {
                continue;
            }
            y[s - 1] = v as i64;
            state.record(y);
        }
        Ok(())
    }
}

struct Scan {
    lo: i64,
    hi: i64,
    eq: u128,
    above: u128,
}

impl Scan {
    fn record(&mut self, y: &[i64]) {
        let norm = y.iter().map(|v| v.abs()).max().unwrap_or(0);
        if norm < self.lo || norm > self.hi || gcd_slice(y) != 1 {
            return;
        }
        if norm == self.lo {
            self.eq += 1;
        } else {
            self.above += 1;
        }
    }
}

/// `N(B)`: rational points with nonzero coordinates and anticanonical height
/// at most `B`, i.e. `2^{-k} Σ_{Π m_i ≤ T} θ(m)` with `T^α ≤ B`.
pub fn height_count(variety: &Variety, b: f64) -> Result<BigUint> {
    let t = height_threshold(b, variety.alpha())?;
    let total = hyperbolic_solution_count(variety, t)?;
    let k = variety.form().factors();
    let unit = BigUint::from(1u32) << k;
    if !(&total % &unit).is_zero() {
        return Err(Error::Consistency(format!(
            "primitive solution count {total} not divisible by 2^{k}"
        )));
    }
    let n = total >> k;
    log::debug!("N({b}) = {n} (T = {t}, fits u64: {})", n.to_u64().is_some());
    Ok(n)
}
