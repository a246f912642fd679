use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::zeta;
use crate::error::{Error, Result};
use crate::forms::{DiagonalForm, Variety};
use crate::local::TruncationParams;

/// Default refusal threshold in elementary operations.
pub const DEFAULT_COST_LIMIT: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Count,
    Predict,
    Series,
    Integral,
    Hyperbola,
    Weyl,
    Full,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Count,
        Mode::Predict,
        Mode::Series,
        Mode::Integral,
        Mode::Hyperbola,
        Mode::Weyl,
        Mode::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Count => "count",
            Mode::Predict => "predict",
            Mode::Series => "series",
            Mode::Integral => "integral",
            Mode::Hyperbola => "hyperbola",
            Mode::Weyl => "weyl",
            Mode::Full => "full",
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown output format {s:?}")),
        }
    }
}

/// What the grid values measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "lowercase")]
pub enum Grid {
    /// Height bounds `B` (or `N` for hyperbolic sums).
    Height(Vec<f64>),
    /// Cube side lengths `X`.
    Box(Vec<f64>),
    /// Truncation cutoffs `W`.
    Cutoff(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> &[f64] {
        match self {
            Grid::Height(v) | Grid::Box(v) | Grid::Cutoff(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub degree: u32,
    pub factors: usize,
    pub coeffs: Vec<i64>,
    pub grid: Grid,
    pub truncation: TruncationParams,
    /// Moment exponent `t` in `∫|f|^{2t}` for the weyl mode.
    pub moment: u32,
    pub format: OutputFormat,
    pub cost_limit: f64,
    /// Closed-form constant to report next to the computed one, if known.
    pub expected_constant: Option<f64>,
    #[serde(skip)]
    pub cache: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn form(&self) -> Result<DiagonalForm> {
        DiagonalForm::new(self.degree, self.factors, self.coeffs.clone())
    }

    pub fn variety(&self) -> Result<Variety> {
        Ok(Variety::from_form(self.form()?))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config { line: 0, msg });
        self.form().map_err(|e| Error::Config { line: 0, msg: e.to_string() })?;
        self.truncation
            .validate()
            .map_err(|e| Error::Config { line: 0, msg: e.to_string() })?;
        let g = self.grid.values();
        if g.is_empty() {
            return bad("grid must be nonempty".into());
        }
        if g.iter().any(|v| !v.is_finite() || *v < 1.0) {
            return bad("grid values must be finite and at least 1".into());
        }
        if g.windows(2).any(|w| w[0] >= w[1]) {
            return bad("grid must be strictly increasing".into());
        }
        let wanted = match self.mode {
            Mode::Count | Mode::Predict | Mode::Full => {
                matches!(self.grid, Grid::Height(_) | Grid::Box(_))
            }
            Mode::Hyperbola => matches!(self.grid, Grid::Height(_)),
            Mode::Weyl => matches!(self.grid, Grid::Box(_)),
            Mode::Series | Mode::Integral => matches!(self.grid, Grid::Cutoff(_)),
        };
        if !wanted {
            return bad(format!("mode {} cannot use this grid", self.mode));
        }
        if self.mode == Mode::Weyl && self.moment == 0 {
            return bad("moment must be at least 1".into());
        }
        if !(self.cost_limit > 0.0) {
            return bad("cost_limit must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    /// Canonical `key = value` rendering; parses back to the same config.
    /// Cache path and thread count are left out since they never affect results.
    pub fn echo(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let _ = writeln!(out, "mode = {}", self.mode);
        let _ = writeln!(out, "degree = {}", self.degree);
        let _ = writeln!(out, "factors = {}", self.factors);
        let coeffs: Vec<String> = self.coeffs.iter().map(i64::to_string).collect();
        let _ = writeln!(out, "coeffs = [{}]", coeffs.join(", "));
        let (key, vals) = match &self.grid {
            Grid::Height(v) => ("b_grid", v),
            Grid::Box(v) => ("x_grid", v),
            Grid::Cutoff(v) => ("w_grid", v),
        };
        let _ = writeln!(out, "{key} = [{}]", list(vals));
        let t = &self.truncation;
        let _ = writeln!(out, "w_series = {}", t.w_series);
        let _ = writeln!(out, "l_max = {}", t.l_max);
        let _ = writeln!(out, "w_integral = {}", t.w_integral);
        let _ = writeln!(out, "prime_cutoff = {}", t.prime_cutoff);
        let _ = writeln!(out, "moment = {}", self.moment);
        let _ = writeln!(out, "format = {}", match self.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        });
        let _ = writeln!(out, "cost_limit = {}", self.cost_limit);
        if let Some(c) = self.expected_constant {
            let _ = writeln!(out, "expected_constant = {c}");
        }
        out
    }
}

/// `Σ x_{0,1}x_{0,2} + x_{1,1}x_{1,2} + x_{2,1}x_{2,2} = 0`, i.e. the
/// hypersurface `x·y = 0` in `P² × P²` reached through `d = 1, k = 2`.
pub fn spencer_preset() -> ExperimentConfig {
    let z2 = zeta(2.0);
    ExperimentConfig {
        mode: Mode::Full,
        degree: 1,
        factors: 2,
        coeffs: vec![1, 1, 1],
        grid: Grid::Height(vec![1e2, 1e3, 1e4, 1e5, 1e6]),
        truncation: TruncationParams::default(),
        moment: 2,
        format: OutputFormat::Csv,
        cost_limit: DEFAULT_COST_LIMIT,
        expected_constant: Some((33.0 - 6.0 * z2) / (8.0 * z2 * zeta(3.0))),
        cache: None,
        threads: None,
    }
}

fn parse_list<T: FromStr>(raw: &str) -> std::result::Result<Vec<T>, String> {
    let inner = raw
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected a [..] list, got {raw:?}"))?
        .trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<T>().map_err(|_| format!("bad list entry {item:?}"))
        })
        .collect()
}

fn parse_scalar<T: FromStr>(raw: &str) -> std::result::Result<T, String> {
    raw.parse::<T>().map_err(|_| format!("bad value {raw:?}"))
}

/// Parse the flat `key = value` format. `#` starts a comment; lists are
/// written `[a, b, c]`. `mode` may be left out when the caller supplies it.
pub fn parse_config(text: &str, mode_override: Option<Mode>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig {
        mode: Mode::Count,
        degree: 0,
        factors: 0,
        coeffs: Vec::new(),
        grid: Grid::Height(Vec::new()),
        truncation: TruncationParams::default(),
        moment: 2,
        format: OutputFormat::Csv,
        cost_limit: DEFAULT_COST_LIMIT,
        expected_constant: None,
        cache: None,
        threads: None,
    };
    let mut mode = None;
    let mut seen = std::collections::HashSet::new();
    let mut grid_line = 0;
    let (mut n, mut s) = (None, None);
    let (mut has_degree, mut has_factors, mut has_coeffs) = (false, false, false);
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| Error::Config { line: line_no, msg };
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key {key:?}")));
        }
        match key {
            "mode" => mode = Some(value.parse::<Mode>().map_err(err)?),
            "degree" | "d" => {
                cfg.degree = parse_scalar(value).map_err(err)?;
                has_degree = true;
            }
            "factors" | "k" => {
                cfg.factors = parse_scalar(value).map_err(err)?;
                has_factors = true;
            }
            "coeffs" => {
                cfg.coeffs = parse_list(value).map_err(err)?;
                has_coeffs = true;
            }
            "n" => n = Some((parse_scalar::<usize>(value).map_err(err)?, line_no)),
            "s" => s = Some((parse_scalar::<usize>(value).map_err(err)?, line_no)),
            "b_grid" | "x_grid" | "w_grid" => {
                if grid_line != 0 {
                    return Err(err("only one of b_grid, x_grid, w_grid may be given".into()));
                }
                grid_line = line_no;
                let v: Vec<f64> = parse_list(value).map_err(err)?;
                cfg.grid = match key {
                    "b_grid" => Grid::Height(v),
                    "x_grid" => Grid::Box(v),
                    _ => Grid::Cutoff(v),
                };
            }
            "w_series" => cfg.truncation.w_series = parse_scalar(value).map_err(err)?,
            "l_max" => cfg.truncation.l_max = parse_scalar(value).map_err(err)?,
            "w_integral" => cfg.truncation.w_integral = parse_scalar(value).map_err(err)?,
            "prime_cutoff" => cfg.truncation.prime_cutoff = parse_scalar(value).map_err(err)?,
            "moment" => cfg.moment = parse_scalar(value).map_err(err)?,
            "format" => cfg.format = value.parse().map_err(err)?,
            "cost_limit" => cfg.cost_limit = parse_scalar(value).map_err(err)?,
            "expected_constant" => cfg.expected_constant = Some(parse_scalar(value).map_err(err)?),
            "cache" => {
                if value.is_empty() {
                    return Err(err("empty cache path".into()));
                }
                cfg.cache = Some(PathBuf::from(value));
            }
            "threads" => cfg.threads = Some(parse_scalar(value).map_err(err)?),
            _ => return Err(err(format!("unknown key {key:?}"))),
        }
    }
    let missing = |what: &str| Error::Config {
        line: 0,
        msg: format!("missing required key {what}"),
    };
    if !has_degree {
        return Err(missing("degree"));
    }
    if !has_factors {
        return Err(missing("factors"));
    }
    if !has_coeffs {
        return Err(missing("coeffs"));
    }
    if let Some((n, line)) = n {
        if cfg.coeffs.len() != n + 1 {
            return Err(Error::Config {
                line,
                msg: format!("n = {n} needs {} coefficients", n + 1),
            });
        }
    }
    if let Some((s, line)) = s {
        if cfg.coeffs.len() != s {
            return Err(Error::Config {
                line,
                msg: format!("s = {s} needs {s} coefficients"),
            });
        }
    }
    cfg.mode = match (mode_override, mode) {
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => return Err(missing("mode")),
    };
    if grid_line == 0 {
        cfg.grid = default_grid(&cfg).ok_or_else(|| missing("b_grid or x_grid"))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Powers of two up to the configured cutoff for the series and integral modes.
fn default_grid(cfg: &ExperimentConfig) -> Option<Grid> {
    let top = match cfg.mode {
        Mode::Series => cfg.truncation.w_series as f64,
        Mode::Integral => cfg.truncation.w_integral,
        _ => return None,
    };
    let mut v = Vec::new();
    let mut w = 4.0;
    while w < top {
        v.push(w);
        w *= 2.0;
    }
    v.push(top);
    Some(Grid::Cutoff(v))
}
