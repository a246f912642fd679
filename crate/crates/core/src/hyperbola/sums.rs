use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::identities::{p_k_eval, rational_to_f64, v_kj};
use super::oracle::{BoxSumOracle, FamilyParams};
use crate::arith::NeumaierSum;
use crate::error::{invalid, Result};

/// A hyperbolic sum, with its exact integer value when the oracle is exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicSum {
    pub value: f64,
    pub exact: Option<u128>,
}

/// Per-coordinate range for [`upsilon_constrained`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordRange {
    /// `u_i > floor`
    Above(u64),
    /// `u_i = 1`
    Pinned,
}

/// `Υ(N) = Σ_{⟨u⟩ ≤ N} h(u)`, or `Υ(N, W)` with `u > W` componentwise.
pub fn upsilon<O: BoxSumOracle + ?Sized>(
    oracle: &O,
    n: u64,
    threshold: Option<&[f64]>,
) -> Result<HyperbolicSum> {
    let k = oracle.dim();
    if n == 0 {
        return invalid("N must be at least 1");
    }
    let ranges: Vec<CoordRange> = match threshold {
        None => vec![CoordRange::Above(0); k],
        Some(w) => {
            if w.len() != k {
                return invalid("threshold dimension differs from the oracle's");
            }
            if w.iter().any(|&x| !(x >= 1.0 && x <= n as f64)) {
                return invalid("threshold entries must lie in [1, N]");
            }
            w.iter().map(|&x| CoordRange::Above(x.floor() as u64)).collect()
        }
    };
    upsilon_constrained(oracle, n, &ranges)
}

/// Hyperbolic sum with each coordinate either pinned to 1 or bounded below.
///
/// Coordinates are enumerated as nested divisor-style loops
/// (`u_1 ≤ N`, `u_2 ≤ N/u_1`, ...). The outermost loop runs in parallel and
/// partial sums are combined in index order.
pub fn upsilon_constrained<O: BoxSumOracle + ?Sized>(
    oracle: &O,
    n: u64,
    ranges: &[CoordRange],
) -> Result<HyperbolicSum> {
    let k = oracle.dim();
    if ranges.len() != k || k == 0 {
        return invalid("one range per coordinate is required");
    }
    // smallest admissible value of each coordinate, and suffix products of those
    let least: Vec<u64> = ranges
        .iter()
        .map(|r| match r {
            CoordRange::Pinned => 1,
            CoordRange::Above(w) => w + 1,
        })
        .collect();
    let mut tail = vec![1u128; k + 1];
    for i in (0..k).rev() {
        tail[i] = tail[i + 1].saturating_mul(least[i] as u128);
    }
    let exact = oracle.is_exact();
    let outer: Vec<u64> = first_range(ranges[0], n, tail[1]);
    let parts: Vec<(f64, u128)> = outer
        .into_par_iter()
        .map(|u| {
            let mut prefix = vec![u];
            let mut acc = NeumaierSum::default();
            let mut ex = 0u128;
            descend(oracle, ranges, &tail, n / u, &mut prefix, &mut acc, &mut ex, exact);
            (acc.value(), ex)
        })
        .collect();
    let value = parts.iter().map(|p| p.0).collect::<NeumaierSum>().value();
    let exact_total = exact.then(|| parts.iter().map(|p| p.1).sum());
    Ok(HyperbolicSum {
        value: exact_total.map_or(value, |e| e as f64),
        exact: exact_total,
    })
}

fn first_range(range: CoordRange, budget: u64, rest: u128) -> Vec<u64> {
    let cap = (budget as u128 / rest.max(1)) as u64;
    match range {
        CoordRange::Pinned => {
            if cap >= 1 {
                vec![1]
            } else {
                Vec::new()
            }
        }
        CoordRange::Above(w) => (w + 1..=cap).collect(),
    }
}

#[allow(clippy::too_many_arguments)]
fn descend<O: BoxSumOracle + ?Sized>(
    oracle: &O,
    ranges: &[CoordRange],
    tail: &[u128],
    budget: u64,
    prefix: &mut Vec<u64>,
    acc: &mut NeumaierSum,
    exact_acc: &mut u128,
    exact: bool,
) {
    let i = prefix.len();
    if i == ranges.len() {
        let v = oracle.point(prefix);
        acc.add(v);
        if exact {
            *exact_acc += v as u128;
        }
        return;
    }
    if i + 1 == ranges.len() {
        let (lo, hi) = match ranges[i] {
            CoordRange::Pinned => (0, budget.min(1)),
            CoordRange::Above(w) => (w, budget.max(w)),
        };
        let v = oracle.run_sum(prefix, lo, hi);
        acc.add(v);
        if exact {
            *exact_acc += v as u128;
        }
        return;
    }
    for u in first_range(ranges[i], budget, tail[i + 1]) {
        prefix.push(u);
        descend(oracle, ranges, tail, budget / u, prefix, acc, exact_acc, exact);
        prefix.pop();
    }
}

/// `Υ(N)` next to `Σ_S Υ_S(N)`, where `S` runs over subsets of coordinates
/// pinned to 1 and the remaining coordinates exceed 1.
pub fn pinned_decomposition<O: BoxSumOracle + ?Sized>(
    oracle: &O,
    n: u64,
) -> Result<(HyperbolicSum, HyperbolicSum)> {
    let k = oracle.dim();
    let full = upsilon(oracle, n, None)?;
    let mut value = NeumaierSum::default();
    let mut exact = Some(0u128);
    for mask in 0u32..(1 << k) {
        let ranges: Vec<CoordRange> = (0..k)
            .map(|i| {
                if mask >> i & 1 == 1 {
                    CoordRange::Pinned
                } else {
                    CoordRange::Above(1)
                }
            })
            .collect();
        let part = upsilon_constrained(oracle, n, &ranges)?;
        value.add(part.value);
        exact = exact.zip(part.exact).map(|(a, b)| a + b);
    }
    let exact = if oracle.is_exact() { exact } else { None };
    Ok((
        full,
        HyperbolicSum {
            value: exact.map_or(value.value(), |e| e as f64),
            exact,
        },
    ))
}

/// Main term and error budget for the sum away from the spikes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeFreePrediction {
    /// `c_h N^α p_k(α log(N/⟨W⟩))`
    pub prediction: f64,
    /// `N^α (min W)^{−δ/(2k)} (log N)^k`
    pub error_budget: f64,
    /// Whether `⟨W⟩ ≤ N^{1/2}` and `min W ≥ (log N)^{2k/δ}` both hold.
    pub in_range: bool,
}

pub fn spike_free_prediction(params: &FamilyParams, n: f64, w: &[f64]) -> Result<SpikeFreePrediction> {
    if w.is_empty() || !(n >= 1.0) || w.iter().any(|&x| !(x >= 1.0)) {
        return invalid("need N >= 1 and a nonempty threshold with entries >= 1");
    }
    let k = w.len() as f64;
    let vol: f64 = w.iter().product();
    let min_w = w.iter().copied().fold(f64::INFINITY, f64::min);
    let log_n = n.ln();
    let in_range = vol <= n.sqrt() && min_w >= log_n.powf(2.0 * k / params.delta);
    if !in_range {
        warn!("threshold {w:?} lies outside the range where the spike-free estimate is proven");
    }
    let t = params.alpha * (n / vol).ln();
    Ok(SpikeFreePrediction {
        prediction: params.c_h * n.powf(params.alpha) * p_k_eval(w.len() as u32, t),
        error_budget: n.powf(params.alpha) * min_w.powf(-params.delta / (2.0 * k)) * log_n.powf(k),
        in_range,
    })
}

/// Lower and upper envelope sums built from boxes `U_j < u ≤ U_{j+1}` with
/// `U_{r,j} = W_r Θ^j` and `Θ^J = N/⟨W⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    pub upper: f64,
    pub theta: f64,
    pub steps: u32,
}

/// `Υ⁻ ≤ Υ(N, W) ≤ Υ⁺` from box sums only. `steps` defaults to
/// `max(k, ⌊(min W)^{δ/(2k)}⌋)`.
pub fn sandwich_bounds<O: BoxSumOracle + ?Sized>(
    oracle: &O,
    n: f64,
    w: &[f64],
    steps: Option<u32>,
) -> Result<Sandwich> {
    let k = oracle.dim();
    if w.len() != k || w.iter().any(|&x| !(x >= 1.0)) {
        return invalid("threshold must have one entry >= 1 per coordinate");
    }
    let vol: f64 = w.iter().product();
    if !(n > vol) {
        return invalid("need N > ⟨W⟩");
    }
    let min_w = w.iter().copied().fold(f64::INFINITY, f64::min);
    let delta = oracle.params().delta;
    let big_j = steps.unwrap_or_else(|| (min_w.powf(delta / (2.0 * k as f64)).floor() as u32).max(k as u32));
    if big_j < k as u32 {
        return invalid("need at least k steps");
    }
    let theta = (n / vol).powf(1.0 / big_j as f64);
    let edges: Vec<Vec<f64>> = w
        .iter()
        .map(|&wr| (0..=big_j + 1).map(|j| wr * theta.powi(j as i32)).collect())
        .collect();
    let shell = |j: &[u32]| -> f64 {
        // H(U_{j+1}, U_j) by inclusion–exclusion over the 2^k corners
        let mut acc = NeumaierSum::default();
        for s in 0u32..(1 << k) {
            let corner: Vec<f64> = (0..k)
                .map(|r| edges[r][(j[r] + (s >> r & 1)) as usize])
                .collect();
            let sign = if (k as u32 - s.count_ones()).is_multiple_of(2) { 1.0 } else { -1.0 };
            acc.add(sign * oracle.box_sum(&corner));
        }
        acc.value()
    };
    let mut lower = NeumaierSum::default();
    let mut upper = NeumaierSum::default();
    let mut j = vec![0u32; k];
    loop {
        let total: u32 = j.iter().sum();
        let v = shell(&j);
        upper.add(v);
        if total + k as u32 <= big_j {
            lower.add(v);
        }
        let mut i = 0;
        loop {
            if i == k {
                return Ok(Sandwich {
                    lower: lower.value(),
                    upper: upper.value(),
                    theta,
                    steps: big_j,
                });
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

/// `Σ_{x ≤ (X,..,X)} (log⟨x⟩)^j ⟨x⟩^{−α} h(x)` against its leading term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedMean {
    pub sum: f64,
    /// `sum / (log X)^{k+j}`
    pub ratio: f64,
    /// `α^k c_h V_{k,j}`
    pub target: f64,
}

fn weighted_mean_record<O: BoxSumOracle + ?Sized>(oracle: &O, x: u64, j: u32, sum: f64) -> WeightedMean {
    let p = oracle.params();
    let k = oracle.dim() as u32;
    WeightedMean {
        sum,
        ratio: sum / (x as f64).ln().powi((k + j) as i32),
        target: p.alpha.powi(k as i32) * p.c_h * rational_to_f64(&v_kj(k, j)),
    }
}

/// Uses the product structure of `h` when the oracle exposes one, and
/// [`weighted_mean_sum_direct`] otherwise.
pub fn weighted_mean_sum<O: BoxSumOracle + ?Sized>(oracle: &O, x: u64, j: u32) -> Result<WeightedMean> {
    if x < 2 {
        return invalid("X must be at least 2");
    }
    let k = oracle.dim();
    if (0..k).any(|i| oracle.coordinate_factor(i, 1).is_none()) {
        return weighted_mean_sum_direct(oracle, x, j);
    }
    let alpha = oracle.params().alpha;
    // moments[i][a] = Σ_x g_i(x) (log x)^a x^{−α}
    let moments: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut sums = vec![NeumaierSum::default(); j as usize + 1];
            for m in 1..=x {
                let g = oracle.coordinate_factor(i, m).unwrap_or(0.0) * (m as f64).powf(-alpha);
                let l = (m as f64).ln();
                let mut lp = 1.0;
                for s in sums.iter_mut() {
                    s.add(g * lp);
                    lp *= l;
                }
            }
            sums.iter().map(NeumaierSum::value).collect()
        })
        .collect();
    // Σ over compositions a of j: j!/Π a_i! · Π moments[i][a_i]
    let mut total = NeumaierSum::default();
    let mut a = vec![0u32; k];
    let fact = |n: u32| (1..=n).fold(1.0, |acc, i| acc * i as f64);
    loop {
        if a.iter().sum::<u32>() == j {
            let mut term = fact(j);
            for (i, &ai) in a.iter().enumerate() {
                term *= moments[i][ai as usize] / fact(ai);
            }
            total.add(term);
        }
        let mut i = 0;
        loop {
            if i == k {
                return Ok(weighted_mean_record(oracle, x, j, total.value()));
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

/// Term-by-term summation over the cube in lexicographic order.
pub fn weighted_mean_sum_direct<O: BoxSumOracle + ?Sized>(oracle: &O, x: u64, j: u32) -> Result<WeightedMean> {
    if x < 2 {
        return invalid("X must be at least 2");
    }
    let k = oracle.dim();
    let alpha = oracle.params().alpha;
    let parts: Vec<f64> = (1..=x)
        .into_par_iter()
        .map(|first| {
            let mut acc = NeumaierSum::default();
            let mut pt = vec![1u64; k];
            pt[0] = first;
            loop {
                let prod: f64 = pt.iter().map(|&v| v as f64).product();
                acc.add(prod.ln().powi(j as i32) * prod.powf(-alpha) * oracle.point(&pt));
                let mut i = k - 1;
                loop {
                    if i == 0 {
                        return acc.value();
                    }
                    if pt[i] < x {
                        pt[i] += 1;
                        break;
                    }
                    pt[i] = 1;
                    i -= 1;
                }
            }
        })
        .collect();
    let sum = parts.into_iter().collect::<NeumaierSum>().value();
    Ok(weighted_mean_record(oracle, x, j, sum))
}

#[cfg(test)]
mod tests {
    use super::super::oracle::{FnOracle, Ones, Permuted};
    use super::*;

    #[test]
    fn divisor_sum_examples() {
        let ones = Ones { k: 2 };
        assert_eq!(upsilon(&ones, 4, None).unwrap().exact, Some(8));
        assert_eq!(upsilon(&ones, 1, None).unwrap().exact, Some(1));
        assert_eq!(upsilon(&ones, 4, Some(&[1.0, 1.0])).unwrap().exact, Some(1));
        assert!(upsilon(&ones, 4, Some(&[0.5, 1.0])).is_err());
    }

    #[test]
    fn run_sums_match_pointwise() {
        let ones = Ones { k: 3 };
        let folded = FnOracle::new(3, FamilyParams::divisor(), true, |_: &[u64]| 1.0);
        for n in [1, 7, 60, 300] {
            assert_eq!(upsilon(&ones, n, None).unwrap(), upsilon(&folded, n, None).unwrap());
            let w = [2.0, 1.5, 3.0];
            assert_eq!(
                upsilon(&ones, n.max(3), Some(&w)).unwrap(),
                upsilon(&folded, n.max(3), Some(&w)).unwrap()
            );
        }
    }

    #[test]
    fn pinned_decomposition_is_exact() {
        let h = FnOracle::new(3, FamilyParams::divisor(), true, |x: &[u64]| ((x[0] + 2 * x[1] + x[2]) % 5) as f64);
        let (full, parts) = pinned_decomposition(&h, 500).unwrap();
        assert_eq!(full.exact, parts.exact);
        assert!(full.exact.unwrap() > 0);
    }

    #[test]
    fn permutation_invariance() {
        let h = FnOracle::new(3, FamilyParams::divisor(), true, |x: &[u64]| (x[0] % 3 + x[1] * x[2] % 4) as f64);
        let p = Permuted::new(&h, vec![2, 0, 1]).unwrap();
        assert_eq!(upsilon(&h, 400, None).unwrap(), upsilon(&p, 400, None).unwrap());
    }

    #[test]
    fn spike_free_examples() {
        let p = FamilyParams::divisor();
        let n = 1e8;
        let w = (n / 5f64.exp()).sqrt();
        let r = spike_free_prediction(&p, n, &[w, w]).unwrap();
        assert!((r.prediction - 4.0 * n).abs() < 1e-6 * n);
        let r = spike_free_prediction(&p, 1e4, &[17.0]).unwrap();
        assert_eq!(r.prediction, 1e4);
    }

    #[test]
    fn sandwich_brackets_exact_sum() {
        let ones = Ones { k: 2 };
        for (n, w) in [(10_000u64, 10.0), (50_000, 20.0), (200_000, 7.0)] {
            let exact = upsilon(&ones, n, Some(&[w, w])).unwrap().value;
            for steps in [2, 3, 8, 20] {
                let s = sandwich_bounds(&ones, n as f64, &[w, w], Some(steps)).unwrap();
                assert!(s.lower <= exact && exact <= s.upper, "{s:?} vs {exact}");
            }
        }
    }

    #[test]
    fn weighted_mean_examples() {
        let ones = Ones { k: 1 };
        let r = weighted_mean_sum(&ones, 4, 0).unwrap();
        assert!((r.sum - 25.0 / 12.0).abs() < 1e-15);
        assert_eq!(r.target, 1.0);
        let big = weighted_mean_sum(&ones, 1_000_000, 0).unwrap();
        assert!((big.ratio - 1.0).abs() < 0.05);
    }

    #[test]
    fn weighted_mean_routes_agree() {
        let ones = Ones { k: 3 };
        for j in 0..3 {
            let a = weighted_mean_sum(&ones, 30, j).unwrap().sum;
            let b = weighted_mean_sum_direct(&ones, 30, j).unwrap().sum;
            assert!((a - b).abs() < 1e-10 * b.abs());
        }
    }
}
