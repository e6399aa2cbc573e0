//! `mellin-sio`: runs verification suites over the operator calculus and
//! writes JSON reports and CSV plot data.
//!
//! Exit status is 0 when every check passes, 1 when any check fails and 2 on
//! configuration or I/O errors.

mod config;
mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use report::{emit_plots, load_summary, write_json, SuiteReport, Timing};
use suites::Context;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Parser)]
#[command(name = "mellin-sio", version, about = "Verification suites for Mellin singular integral operators")]
struct Cli {
    /// JSON config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the grid size: n_t = N, n_x = N/2.
    #[arg(long, global = true, value_name = "N")]
    grid_n: Option<usize>,

    /// Seed for randomized probes and sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for reports, plot data and caches.
    #[arg(long, global = true, default_value = "mellin-out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transform round trips, s/r/p identities, PV quadrature vs multiplier.
    Identities,
    /// Shift and binomial symbol realization, Neumann vs series symbol.
    Pdo,
    /// Disk lemmas, ellipticity, homotopy scan, regularizer checks.
    Index,
    /// Merge suite reports into one summary and emit CSV plot data.
    Report {
        /// Report files; defaults to the suite reports found in the output
        /// directory.
        paths: Vec<PathBuf>,
    },
}

type Suite = fn(&Context) -> Result<(SuiteReport, Timing), CliError>;

fn run_suite(cli: &Cli, suite: Suite) -> Result<bool, CliError> {
    let config = Config::load(cli.config.as_deref())?;
    let ctx = Context::new(config, cli.grid_n, cli.seed, &cli.out)?;
    let (report, timing) = suite(&ctx)?;
    write_json(&cli.out.join(format!("{}.json", report.suite)), &report)?;
    write_json(&cli.out.join("timing").join(format!("{}.json", report.suite)), &timing)?;
    print_report(&report, &timing);
    Ok(report.pass)
}

fn print_report(report: &SuiteReport, timing: &Timing) {
    println!("suite {} on grid {} (seed {})", report.suite, report.grid_hash, report.seed);
    for c in &report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let value = c.value.map_or("-".to_string(), |v| format!("{v:.3e}"));
        let secs = timing.seconds.get(&c.name).copied().unwrap_or(0.0);
        println!(
            "  {verdict} {:<22} {value:>10} {:?} {:.0e}  [{secs:.1}s] {}",
            c.name, c.relation, c.threshold, c.note
        );
    }
    println!("{} {}", report.suite, if report.pass { "PASS" } else { "FAIL" });
}

fn default_reports(out: &Path) -> Vec<PathBuf> {
    ["identities", "pdo", "index"]
        .iter()
        .map(|s| out.join(format!("{s}.json")))
        .filter(|p| p.exists())
        .collect()
}

fn run_report(cli: &Cli, paths: &[PathBuf]) -> Result<bool, CliError> {
    let paths = if paths.is_empty() {
        let found = default_reports(&cli.out);
        if found.is_empty() {
            return Err(CliError::Io(format!("no suite reports in {}", cli.out.display())));
        }
        found
    } else {
        paths.to_vec()
    };
    let summary = load_summary(&paths)?;
    write_json(&cli.out.join("summary.json"), &summary)?;
    let plots = emit_plots(&summary, &cli.out.join("plots"))?;
    for (name, r) in &summary.suites {
        let failed = r.checks.iter().filter(|c| !c.pass).count();
        println!("{name}: {} ({} checks, {failed} failed)", if r.pass { "PASS" } else { "FAIL" }, r.checks.len());
    }
    println!("wrote {} plot files; overall {}", plots.len(), if summary.pass { "PASS" } else { "FAIL" });
    Ok(summary.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Identities => run_suite(&cli, suites::identities),
        Command::Pdo => run_suite(&cli, suites::pdo),
        Command::Index => run_suite(&cli, suites::index),
        Command::Report { paths } => run_report(&cli, paths),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("mellin-sio: {e}");
            ExitCode::from(2)
        }
    }
}
