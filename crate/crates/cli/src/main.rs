//! `bandspectra` command-line runner.
//!
//! Exit codes: 0 pass, 1 a check failed, 2 configuration or I/O error,
//! 3 numerical error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bandspectra::harness::{
    emit_reports, run_centered, run_clt, run_lln, run_oracle_check, ExperimentConfig, ExperimentReport,
};
use bandspectra::partitions::{audit_prop31, matching_bound_counterexample, TripleBounds};
use bandspectra::{Error, LimitTable};
use clap::{Args, Parser, Subcommand};

const DEFAULT_OUT_DIR: &str = "bandspectra-out";

#[derive(Parser)]
#[command(name = "bandspectra", version, about = "Spectral statistics of banded sample covariance matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace moments and spectral histogram against their limits.
    Lln(RunArgs),
    /// Fluctuations of trace powers against the limiting covariance.
    Clt(RunArgs),
    /// Exact joint cumulants of trace powers against Monte Carlo, at tiny sizes.
    Oracle(RunArgs),
    /// Size of the perturbation caused by column centering.
    Centered(RunArgs),
    /// Write the table of limiting quantities for a model.
    Limits(LimitsArgs),
    /// Set-partition utilities.
    Partitions {
        #[command(subcommand)]
        action: PartitionsCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `out_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides `workers` from the configuration.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct LimitsArgs {
    /// JSON experiment configuration; only the model is used.
    #[arg(long)]
    config: PathBuf,
    /// Largest trace power; defaults to the largest entry of `k_list`.
    #[arg(long)]
    max_order: Option<usize>,
    /// Directory for `limits.csv`; prints to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PartitionsCommand {
    /// Exhaustively check the pairing inequalities for one k.
    Audit {
        #[arg(long)]
        k: usize,
        /// Raise the cap on k from 4 to 5.
        #[arg(long)]
        allow_large: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical { .. } | Error::InsufficientData { .. } => 3,
        _ => 2,
    }
}

/// Returns whether every check passed.
fn run(command: Command) -> Result<bool, Error> {
    match command {
        Command::Lln(args) => experiment(&args, |c| Ok(Box::new(run_lln(c)?))),
        Command::Clt(args) => experiment(&args, |c| Ok(Box::new(run_clt(c)?))),
        Command::Oracle(args) => experiment(&args, |c| Ok(Box::new(run_oracle_check(c)?))),
        Command::Centered(args) => experiment(&args, |c| Ok(Box::new(run_centered(c)?))),
        Command::Limits(args) => limits(&args),
        Command::Partitions {
            action: PartitionsCommand::Audit { k, allow_large },
        } => audit(k, allow_large),
    }
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    if let Some(out) = &args.out {
        config.out_dir = Some(out.clone());
    }
    Ok(config)
}

fn experiment<F>(args: &RunArgs, runner: F) -> Result<bool, Error>
where
    F: FnOnce(&ExperimentConfig) -> Result<Box<dyn ExperimentReport>, Error>,
{
    let config = load_config(args)?;
    let report = runner(&config)?;
    let dir = config.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let files = emit_reports(report.as_ref(), &config, &dir)?;
    for w in report.warnings() {
        eprintln!("warning: {w}");
    }
    let rows = report.summary_rows();
    let failed = rows.iter().filter(|r| !r.pass).count();
    let passed = report.passed();
    println!(
        "{}: {} ({} of {} rows passed, {:.1} s)",
        report.kind().name(),
        if passed { "pass" } else { "fail" },
        rows.len() - failed,
        rows.len(),
        report.runtime_seconds()
    );
    println!("wrote {}", files.summary.parent().unwrap_or(Path::new(".")).display());
    Ok(passed)
}

fn limits(args: &LimitsArgs) -> Result<bool, Error> {
    let config = ExperimentConfig::load(&args.config)?;
    let model = config.model.build()?;
    let max_order = args
        .max_order
        .unwrap_or_else(|| config.k_list.iter().copied().max().unwrap_or(1));
    let table = LimitTable::build(&model, max_order)?;
    let csv = table.to_csv();
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            let path = dir.join("limits.csv");
            std::fs::write(&path, csv).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(true)
}

fn audit(k: usize, allow_large: bool) -> Result<bool, Error> {
    let report = audit_prop31(k, allow_large)?;
    println!(
        "k = {}: {} matchings, {} singleton-free candidates, {} connected triples checked",
        report.k, report.matchings, report.candidates, report.checked
    );
    for (r, s) in &report.by_r {
        println!("  r = {r}: {} triples, slack {}..={}", s.count, s.min_slack, s.max_slack);
    }
    for v in &report.violations {
        println!(
            "  violation: pi1 = {:?}, pi = {:?}, joins {} + {} with {} blocks",
            v.pi1.blocks(),
            v.pi.blocks(),
            v.bounds.join0,
            v.bounds.join1,
            v.bounds.parts
        );
    }
    let (pi0, pi1, pi) = matching_bound_counterexample();
    let t = TripleBounds::evaluate(&pi0, &pi1, &pi)?;
    println!(
        "fixture k = {}, r = {}: joins {} + {}; sharpened bound {} {}; matching-only bound {} {}",
        t.k,
        t.r,
        t.join0,
        t.join1,
        t.sharpened_bound(),
        if t.holds_sharpened() { "holds" } else { "fails" },
        t.matching_bound(),
        if t.holds_matching_bound() { "holds" } else { "fails" },
    );
    println!("{}", if report.passed() { "pass" } else { "fail" });
    Ok(report.passed())
}
