//! `hyperspike <mode> --config <path> [--out csv|json] [--cache <path>] [--threads N]`
//!
//! Exit codes: 0 on success, 2 for an invalid config, 3 when the cost
//! estimate exceeds the configured limit, 1 for any other failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hyperspike::experiments::{parse_config, run_experiment, Mode, OutputFormat};
use hyperspike::Error;
use log::info;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Count,
    Predict,
    Series,
    Integral,
    Hyperbola,
    Weyl,
    Full,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Count => Mode::Count,
            ModeArg::Predict => Mode::Predict,
            ModeArg::Series => Mode::Series,
            ModeArg::Integral => Mode::Integral,
            ModeArg::Hyperbola => Mode::Hyperbola,
            ModeArg::Weyl => Mode::Weyl,
            ModeArg::Full => Mode::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "hyperspike", version, about = "Exact counts and local-density predictions for diagonal equations over products")]
struct Cli {
    mode: ModeArg,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<FormatArg>,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::InvalidInput(_) | Error::Cache { .. } => 2,
        Error::CostRefused { .. } => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<String, Error> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| Error::Config {
        line: 0,
        msg: format!("cannot read {}: {e}", cli.config.display()),
    })?;
    let mut cfg = parse_config(&text, Some(cli.mode.into()))?;
    if let Some(f) = cli.out {
        cfg.format = match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    if cli.cache.is_some() {
        cfg.cache = cli.cache;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    cfg.validate()?;
    let report = run_experiment(&cfg)?;
    for (stage, secs) in &report.timings {
        info!("{stage}: {secs:.3} s");
    }
    match cfg.format {
        OutputFormat::Csv => Ok(report.to_csv()),
        OutputFormat::Json => report.to_json().map(|mut s| {
            s.push('\n');
            s
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hyperspike: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
