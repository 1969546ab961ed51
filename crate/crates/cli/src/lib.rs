//! Command-line harness: runs an experiment, writes `<name>.csv` and
//! `<name>.manifest.json`, and reports validation through the exit code.

pub mod args;
pub mod experiments;
pub mod manifest;
pub mod selftest;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use experiments::Report;
use manifest::{RunManifest, Validation, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

/// Files written by one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub manifest: RunManifest,
}

/// Computes the report for `command` on a pool of the requested size.
pub fn execute(command: &Command) -> anyhow::Result<Report> {
    let threads = command.common().map_or(0, |c| c.threads);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    pool.install(|| match command {
        Command::Mean(a) => experiments::run_mean(a),
        Command::Gp(a) => experiments::run_gp(a),
        Command::GpNoisy(a) => experiments::run_gp_noisy(a),
        Command::Sgld(a) => experiments::run_sgld(a),
        Command::Logreg(a) => experiments::run_logreg(a),
        Command::Selftest(a) => experiments::run_selftest(a),
        Command::Replay(_) => anyhow::bail!("replay has no report of its own"),
    })
}

fn parameters(command: &Command) -> serde_json::Value {
    let value = match command {
        Command::Mean(a) => serde_json::to_value(a),
        Command::Gp(a) => serde_json::to_value(a),
        Command::GpNoisy(a) => serde_json::to_value(a),
        Command::Sgld(a) => serde_json::to_value(a),
        Command::Logreg(a) => serde_json::to_value(a),
        Command::Selftest(a) => serde_json::to_value(a),
        Command::Replay(a) => serde_json::to_value(a),
    };
    value.expect("arguments serialise")
}

/// Runs `command` and writes its CSV and manifest.
pub fn run_command(command: &Command) -> anyhow::Result<RunOutput> {
    let common = command
        .common()
        .ok_or_else(|| anyhow::anyhow!("{} does not write output directly", command.name()))?;
    let start = Instant::now();
    let report = execute(command)?;
    std::fs::create_dir_all(&common.out_dir)?;
    let csv_path = common.out_dir.join(format!("{}.csv", command.name()));
    let manifest_path = common.out_dir.join(format!("{}.manifest.json", command.name()));
    report.table.save(&csv_path)?;
    let manifest = RunManifest {
        experiment: command.name().into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        schema_version: SCHEMA_VERSION,
        seed: common.seed,
        command_line: command.command_line(),
        parameters: parameters(command),
        metadata: report.metadata.clone(),
        columns: RunManifest::columns_from(&report.table.columns),
        csv_path,
        manifest_path: manifest_path.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        validation: Validation {
            passed: report.failures.is_empty(),
            failures: report.failures.clone(),
        },
    };
    manifest.save(&manifest_path)?;
    Ok(RunOutput { report, manifest })
}

/// Rebuilds the command recorded in a manifest, with optional overrides.
pub fn replay_command(manifest: &RunManifest, out_dir: Option<PathBuf>, threads: Option<usize>) -> anyhow::Result<Command> {
    let mut line = manifest.command_line.clone();
    let mut set = |flag: &str, value: String| match line.iter().position(|a| a == flag) {
        Some(i) if i + 1 < line.len() => line[i + 1] = value,
        _ => {
            line.push(flag.into());
            line.push(value);
        }
    };
    if let Some(dir) = out_dir {
        set("--out-dir", dir.display().to_string());
    }
    if let Some(t) = threads {
        set("--threads", t.to_string());
    }
    let cli = Cli::try_parse_from(&line)?;
    anyhow::ensure!(!matches!(cli.command, Command::Replay(_)), "manifest records a replay");
    Ok(cli.command)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let command = match cli.command {
        Command::Replay(r) => match RunManifest::load(&r.manifest).and_then(|m| replay_command(&m, r.out_dir, r.threads)) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: cannot replay {}: {e:#}", r.manifest.display());
                return EXIT_USAGE;
            }
        },
        other => other,
    };
    match run_command(&command) {
        Ok(out) => {
            for line in &out.report.summaries {
                println!("{line}");
            }
            println!("wrote {}", out.manifest.csv_path.display());
            if out.report.failures.is_empty() {
                EXIT_OK
            } else {
                for f in &out.report.failures {
                    eprintln!("validation failed: {f}");
                }
                EXIT_VALIDATION
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
