mod compute;
mod error;
mod input;
mod sweep;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geojsd::estimate::EstimatorConfig;
use geojsd::verify::{self, Suite, SuiteReport, VerifyConfig};
use geojsd::LogBase;

use crate::compute::{ComputeRequest, Divergence, Inputs};
use crate::error::{CliError, Result};

/// Jensen–Shannon-type divergences with generalized mixtures.
///
/// Exit codes: 0 success, 1 verification failure, 2 usage or input error,
/// 3 mathematical error (disjoint supports, non-positive-definite matrix, ...).
#[derive(Debug, Parser)]
#[command(name = "geojsd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one divergence and print it as JSON.
    Compute(ComputeArgs),
    /// Run self-check suites. Table on stderr, JSON report on stdout.
    Verify(VerifyArgs),
    /// Evaluate a quantity over a parameter grid and print CSV.
    Sweep {
        /// JSON sweep descriptor.
        descriptor: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Base {
    Nats,
    Bits,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> Self {
        match b {
            Base::Nats => LogBase::Nats,
            Base::Bits => LogBase::Bits,
        }
    }
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[arg(long = "div", value_enum)]
    divergence: Divergence,
    /// First density file.
    #[arg(long)]
    p1: PathBuf,
    /// Second density file.
    #[arg(long)]
    p2: PathBuf,
    /// Read JSON Gaussians instead of discrete weight files.
    #[arg(long)]
    gaussian: bool,
    /// Divide discrete weights by their sum.
    #[arg(long)]
    normalize: bool,
    /// arithmetic, geometric, harmonic, power:<p>, exp, min or max.
    #[arg(long, default_value = "geometric")]
    mean: String,
    /// Source mean for kl_mixtures.
    #[arg(long, default_value = "arithmetic")]
    from_mean: String,
    /// Skew weight on the first argument, for the mean and for bhattacharyya.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Weight on the first KL term of js_m and js_m_plus.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "nats")]
    base: Base,
    /// Estimate by Monte Carlo with this many samples where supported.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, env = "GEOJSD_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4096)]
    chunk_size: u64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, env = "GEOJSD_SEED", default_value_t = VerifyConfig::default().seed)]
    seed: u64,
    /// Random pairs for the identity and bound suites.
    #[arg(long, default_value_t = VerifyConfig::default().pairs)]
    pairs: usize,
    #[arg(long, default_value_t = VerifyConfig::default().mc_samples)]
    mc_samples: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SuiteArg {
    Identities,
    Bounds,
    Counterexamples,
    GaussianOracle,
    McConvergence,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Identities => Suite::Identities,
            SuiteArg::Bounds => Suite::Bounds,
            SuiteArg::Counterexamples => Suite::Counterexamples,
            SuiteArg::GaussianOracle => Suite::GaussianOracle,
            SuiteArg::McConvergence => Suite::McConvergence,
            SuiteArg::All => Suite::All,
        }
    }
}

fn compute(a: ComputeArgs) -> Result<()> {
    let mean = input::mean(&a.mean, a.alpha)?;
    let from_mean = input::mean(&a.from_mean, a.alpha)?;
    let inputs = if a.gaussian {
        Inputs::Gaussian(input::gaussian(&a.p1)?, input::gaussian(&a.p2)?)
    } else {
        Inputs::Discrete(input::discrete(&a.p1, a.normalize)?, input::discrete(&a.p2, a.normalize)?)
    };
    let estimator = match a.samples {
        Some(s) => {
            let cfg = EstimatorConfig::new(s, a.seed).with_chunk_size(a.chunk_size);
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            Some(cfg)
        }
        None => None,
    };
    let req = ComputeRequest {
        divergence: a.divergence,
        mean,
        from_mean,
        alpha: a.alpha,
        beta: a.beta,
        gamma: a.gamma,
        base: a.base.into(),
        inputs,
        estimator,
    };
    let result = req.run()?;
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, &result)?;
    writeln!(out)?;
    Ok(())
}

fn print_table(reports: &[SuiteReport], mut err: impl Write) -> io::Result<()> {
    for r in reports {
        writeln!(
            err,
            "== {} ({}, {:.0} ms)",
            r.suite,
            if r.passed { "pass" } else { "FAIL" },
            r.elapsed_ms
        )?;
        for c in &r.checks {
            writeln!(
                err,
                "  {:4}  {:<66} cases {:>6}  worst {:>11.3e}  tol {:.0e}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.cases,
                c.worst,
                c.tolerance
            )?;
            if !c.passed && !c.detail.is_empty() {
                writeln!(err, "        {}", c.detail)?;
            }
        }
    }
    Ok(())
}

fn run_verify(a: VerifyArgs) -> Result<()> {
    let cfg = VerifyConfig {
        seed: a.seed,
        pairs: a.pairs,
        mc_samples: a.mc_samples,
        ..VerifyConfig::default()
    };
    let reports = verify::run(a.suite.into(), &cfg);
    print_table(&reports, io::stderr().lock())?;
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &reports)?;
    writeln!(out)?;
    let failed = reports.iter().map(|r| r.failures().count()).sum();
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(())
}

fn run_sweep(path: PathBuf) -> Result<()> {
    let spec = sweep::load(&path)?;
    let rows = sweep::run(&spec)?;
    sweep::write_csv(&rows, io::stdout().lock())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Compute(a) => compute(a),
        Command::Verify(a) => run_verify(a),
        Command::Sweep { descriptor } => run_sweep(descriptor),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
