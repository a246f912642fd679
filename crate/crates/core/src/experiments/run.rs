use std::time::Instant;

use log::{info, warn};
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::cache::FileCache;
use super::config::{ExperimentConfig, Grid, Mode};
use super::report::{ratio, Meta, Report, Row};
use crate::error::{Error, Result};
use crate::forms::{count_box_positive, height_count, height_threshold, BoxBounds};
use crate::hyperbola::{asymptotic_fit, upsilon, AsymptoticModel, Ones};
use crate::local::{
    assemble_density_cached, integral_table, predicted_constant_cached, singular_integral_cutoffs,
    truncated_singular_series, DensityCache, NoCache,
};
use crate::weyl::{moment_integral, moment_quadrature};

/// Rough count of elementary operations the configuration will need.
pub fn estimate_cost(cfg: &ExperimentConfig) -> Result<f64> {
    let form = cfg.form()?;
    let (d, k, s) = (form.degree() as f64, form.factors() as i32, form.terms() as i32);
    let t = &cfg.truncation;
    let density = || {
        let series = (t.w_series as f64).powi(2) * s as f64;
        let integral = t.w_integral * form.max_coeff() as f64 * 60.0 * 2f64.powi(s);
        series + integral
    };
    let grid = cfg.grid.values();
    let height = |b: f64| -> Result<f64> {
        let alpha = cfg.variety()?.alpha();
        let tt = height_threshold(b, alpha)? as f64;
        let shell = tt * (1.0 + tt.ln()).powi(k - 1);
        Ok(k as f64 * shell.powi((s - 1).max(1)))
    };
    let boxed = |x: f64| (x.floor().powi(k)).powi((s + 1) / 2);
    let cost = match (cfg.mode, &cfg.grid) {
        (Mode::Count, Grid::Height(_)) | (Mode::Full, Grid::Height(_)) => {
            let counts = grid.iter().map(|&b| height(b)).sum::<Result<f64>>()?;
            counts + if cfg.mode == Mode::Full { density() } else { 0.0 }
        }
        (Mode::Count, Grid::Box(_)) | (Mode::Full, Grid::Box(_)) => {
            let counts: f64 = grid.iter().map(|&x| boxed(x)).sum();
            counts + if cfg.mode == Mode::Full { density() } else { 0.0 }
        }
        (Mode::Predict, _) => density(),
        (Mode::Series, _) => grid.iter().copied().fold(0.0, f64::max).powi(2) * s as f64,
        (Mode::Integral, _) => grid.iter().copied().fold(0.0, f64::max) * form.max_coeff() as f64 * 60.0 * s as f64,
        (Mode::Hyperbola, _) => grid.iter().map(|&n| n * (1.0 + n.ln()).powi((k - 2).max(0))).sum(),
        (Mode::Weyl, _) => grid
            .iter()
            .map(|&x| {
                let values = x.floor().powi(k);
                let nodes = 2.0 * cfg.moment as f64 * x.floor().powf(d * k as f64);
                values.powi(cfg.moment as i32) + nodes * (1.0 + nodes.ln())
            })
            .sum(),
        _ => return Err(Error::Config { line: 0, msg: "mode and grid do not match".into() }),
    };
    Ok(cost)
}

/// Run with the cache and thread count named in the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let cache: Option<FileCache> = cfg.cache.as_deref().map(FileCache::open).transpose()?;
    let cache_ref: &dyn DensityCache = match &cache {
        Some(c) => c,
        None => &NoCache,
    };
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config { line: 0, msg: format!("thread pool: {e}") })?;
            pool.install(|| run_experiment_with_cache(cfg, cache_ref))
        }
        None => run_experiment_with_cache(cfg, cache_ref),
    }
}

pub fn run_experiment_with_cache(cfg: &ExperimentConfig, cache: &dyn DensityCache) -> Result<Report> {
    cfg.validate()?;
    let estimate = estimate_cost(cfg)?;
    if estimate > cfg.cost_limit {
        return Err(Error::CostRefused {
            estimate,
            limit: cfg.cost_limit,
        });
    }
    info!("{} run, estimated cost {estimate:.3e}", cfg.mode);
    let mut report = Report {
        meta: Meta {
            mode: cfg.mode,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.echo(),
            constant: None,
            constant_printed: None,
            expected_constant: cfg.expected_constant,
            notes: Vec::new(),
        },
        rows: Vec::new(),
        density: None,
        model: None,
        timings: Vec::new(),
    };
    let start = Instant::now();
    match cfg.mode {
        Mode::Count => report.rows = exact_rows(cfg)?.into_iter().map(|(scale, exact)| bare_row(scale, exact)).collect(),
        Mode::Predict | Mode::Full => predict_or_full(cfg, cache, &mut report)?,
        Mode::Series => series_rows(cfg, &mut report)?,
        Mode::Integral => integral_rows(cfg, cache, &mut report)?,
        Mode::Hyperbola => hyperbola_rows(cfg, &mut report)?,
        Mode::Weyl => weyl_rows(cfg, &mut report)?,
    }
    report.timings.push((cfg.mode.name().to_string(), start.elapsed().as_secs_f64()));
    Ok(report)
}

fn bare_row(scale: f64, exact: num_bigint::BigUint) -> Row {
    Row {
        scale,
        exact: Some(exact.to_string()),
        prediction: None,
        ratio: None,
        residual: None,
    }
}

/// Exact counts over the grid: `N(B)` for heights, `M⁺_c(X,..,X)` for boxes.
fn exact_rows(cfg: &ExperimentConfig) -> Result<Vec<(f64, num_bigint::BigUint)>> {
    let grid = cfg.grid.values().to_vec();
    match &cfg.grid {
        Grid::Height(_) => {
            let variety = cfg.variety()?;
            grid.into_par_iter()
                .map(|b| height_count(&variety, b).map(|n| (b, n)))
                .collect()
        }
        Grid::Box(_) => {
            let form = cfg.form()?;
            grid.into_par_iter()
                .map(|x| {
                    let bounds = BoxBounds::cube(form.factors(), x)?;
                    count_box_positive(&form, &bounds).map(|n| (x, n))
                })
                .collect()
        }
        Grid::Cutoff(_) => Err(Error::Config { line: 0, msg: "counts need a height or box grid".into() }),
    }
}

fn predict_or_full(cfg: &ExperimentConfig, cache: &dyn DensityCache, report: &mut Report) -> Result<()> {
    let form = cfg.form()?;
    let k = form.factors() as i32;
    let grid = cfg.grid.values();
    let (constant, scale_of): (f64, Box<dyn Fn(f64) -> f64>) = match cfg.grid {
        Grid::Height(_) => {
            let c = predicted_constant_cached(&cfg.variety()?, &cfg.truncation, cache)?;
            report.meta.notes.extend(c.warnings.iter().cloned());
            report.meta.constant = Some(c.chain);
            report.meta.constant_printed = Some(c.printed);
            let chain = c.chain;
            report.density = Some(c.density);
            (chain, Box::new(move |b: f64| b * b.ln().powi(k - 1)))
        }
        _ => {
            let dens = assemble_density_cached(&form, &cfg.truncation, cache)?;
            let e_plus = dens.e_plus;
            report.density = Some(dens);
            let exponent = (form.factors() * form.terms()) as i32 - (form.factors() as i32) * form.degree() as i32;
            (e_plus, Box::new(move |x: f64| x.powi(exponent)))
        }
    };
    if let Some(d) = &report.density {
        report.meta.notes.extend(d.warnings.iter().cloned());
    }
    if cfg.mode == Mode::Predict {
        report.rows = grid
            .iter()
            .map(|&x| Row {
                scale: x,
                exact: None,
                prediction: Some(constant * scale_of(x)),
                ratio: None,
                residual: None,
            })
            .collect();
        return Ok(());
    }
    let counts = exact_rows(cfg)?;
    report.rows = counts
        .iter()
        .map(|(x, n)| {
            let exact = n.to_f64().unwrap_or(f64::INFINITY);
            let pred = constant * scale_of(*x);
            Row {
                scale: *x,
                exact: Some(n.to_string()),
                prediction: Some(pred),
                ratio: ratio(exact, pred),
                residual: Some(exact - pred),
            }
        })
        .collect();
    let samples: Vec<(f64, f64)> = counts
        .iter()
        .map(|(x, n)| (*x, n.to_f64().unwrap_or(f64::INFINITY)))
        .collect();
    let (alpha, degree) = match cfg.grid {
        Grid::Height(_) => (1.0, form.factors() as u32),
        _ => (scale_of(std::f64::consts::E).ln(), 1),
    };
    report.model = fit_or_note(&samples, alpha, degree, &mut report.meta.notes);
    Ok(())
}

fn fit_or_note(samples: &[(f64, f64)], alpha: f64, k: u32, notes: &mut Vec<String>) -> Option<AsymptoticModel> {
    match asymptotic_fit(samples, alpha, k) {
        Ok(m) => Some(m),
        Err(e) => {
            warn!("no asymptotic fit: {e}");
            notes.push(format!("no asymptotic fit: {e}"));
            None
        }
    }
}

fn series_rows(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let form = cfg.form()?;
    let grid = cfg.grid.values();
    let top = grid[grid.len() - 1].floor() as u64;
    let est = truncated_singular_series(&form, top)?;
    report.rows = grid
        .iter()
        .map(|&w| {
            let w_int = w.floor() as u64;
            let value = est.partial(w_int);
            Row {
                scale: w,
                exact: None,
                prediction: Some(value),
                ratio: None,
                residual: Some((value - est.partial(w_int / 2)).abs()),
            }
        })
        .collect();
    Ok(())
}

fn integral_rows(cfg: &ExperimentConfig, cache: &dyn DensityCache, report: &mut Report) -> Result<()> {
    let form = cfg.form()?;
    let grid = cfg.grid.values();
    if grid[0] < 3.0 {
        return Err(Error::Config { line: 0, msg: "integral cutoffs must be at least 3".into() });
    }
    let top = grid[grid.len() - 1];
    let key = crate::local::form_hash(&form);
    let mut cutoffs: Vec<f64> = grid.iter().flat_map(|&w| [w, w / 2.0]).collect();
    cutoffs.sort_by(f64::total_cmp);
    cutoffs.dedup();
    let cached: Vec<Option<f64>> = cutoffs.iter().map(|&w| cache.integral(&key, w)).collect();
    let values: Vec<f64> = if cached.iter().all(Option::is_some) {
        cached.into_iter().flatten().collect()
    } else if form.all_same_sign() {
        vec![0.0; cutoffs.len()]
    } else {
        let table = integral_table(form.degree(), form.factors(), form.max_coeff(), top)?;
        let fresh = singular_integral_cutoffs(form.coeffs(), &table, &cutoffs)?;
        for (&w, &v) in cutoffs.iter().zip(&fresh) {
            cache.store_integral(&key, w, v);
        }
        fresh
    };
    let lookup = |w: f64| values[cutoffs.iter().position(|&c| c == w).expect("cutoff present")];
    report.rows = grid
        .iter()
        .map(|&w| Row {
            scale: w,
            exact: None,
            prediction: Some(lookup(w)),
            ratio: None,
            residual: Some((lookup(w) - lookup(w / 2.0)).abs()),
        })
        .collect();
    Ok(())
}

fn hyperbola_rows(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let k = cfg.factors;
    let ones = Ones { k };
    let fact: f64 = (1..k).map(|i| i as f64).product();
    let grid = cfg.grid.values();
    let sums = grid
        .iter()
        .map(|&n| upsilon(&ones, n.floor() as u64, None).map(|u| (n, u)))
        .collect::<Result<Vec<_>>>()?;
    report.rows = sums
        .iter()
        .map(|(n, u)| {
            let exact = u.value;
            let pred = n * n.ln().powi(k as i32 - 1) / fact;
            Row {
                scale: *n,
                exact: u.exact.map(|e| e.to_string()),
                prediction: Some(pred),
                ratio: ratio(exact, pred),
                residual: Some(exact - pred),
            }
        })
        .collect();
    let samples: Vec<(f64, f64)> = sums.iter().map(|(n, u)| (*n, u.value)).collect();
    report.model = fit_or_note(&samples, 1.0, k as u32, &mut report.meta.notes);
    Ok(())
}

fn weyl_rows(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let power = 2 * cfg.moment;
    let (d, k) = (cfg.degree, cfg.factors);
    report.rows = cfg
        .grid
        .values()
        .par_iter()
        .map(|&x| {
            let bounds = BoxBounds::cube(k, x)?;
            let exact = moment_integral(d, &bounds, power)?;
            let quad = moment_quadrature(d, &bounds, power)?;
            let e = exact.to_f64().unwrap_or(f64::INFINITY);
            Ok(Row {
                scale: x,
                exact: Some(exact.to_string()),
                prediction: Some(quad),
                ratio: ratio(e, quad),
                residual: Some(e - quad),
            })
        })
        .collect::<Result<_>>()?;
    Ok(())
}
