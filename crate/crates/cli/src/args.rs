use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ISMI_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ismi", version, about = "Per-sample mutual information generalization bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Gaussian mean estimation: exact, simulated and bounded gap.
    Mean(MeanArgs),
    /// Phase-retrieval ERM on the unit circle.
    Gp(GpArgs),
    /// The same learner with its output replaced by noise w.p. 1 - epsilon.
    GpNoisy(GpNoisyArgs),
    /// SGLD bounds: closed form, per-path Monte Carlo and full-data baseline.
    Sgld(SgldArgs),
    /// Logistic regression on a Gaussian mixture with kNN-estimated bound.
    Logreg(LogregArgs),
    /// Oracle and closed-form consistency checks.
    Selftest(SelftestArgs),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Master seed.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Worker threads (0: one per core). Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Output directory for the CSV and manifest.
    #[arg(long, env = OUT_DIR_ENV, default_value = "results")]
    pub out_dir: PathBuf,
}

impl CommonArgs {
    fn push_args(&self, out: &mut Vec<String>) {
        push(out, "--seed", self.seed);
        push(out, "--threads", self.threads);
        push(out, "--out-dir", self.out_dir.display());
    }
}

fn push(out: &mut Vec<String>, flag: &str, value: impl std::fmt::Display) {
    out.push(flag.into());
    out.push(value.to_string());
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeanArgs {
    /// Sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    pub n_grid: Vec<usize>,
    /// Monte Carlo trials per sample size.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Dimension.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Per-coordinate variance.
    #[arg(long, default_value_t = 1.0)]
    pub sigma_sq: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GpArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64,128,256,512,1024")]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GpNoisyArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64,128,256,512,1024")]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Probability of returning the ERM output.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SgldArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub n_grid: Vec<usize>,
    /// Epoch counts K.
    #[arg(long, value_delimiter = ',', default_value = "2,10,50")]
    pub epochs: Vec<usize>,
    /// Step constant in eta_t = c / t.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Gradient norm bound.
    #[arg(long = "lipschitz", default_value_t = 1.0)]
    pub lipschitz: f64,
    /// Sub-Gaussian parameter of the loss.
    #[arg(long = "subgaussian", default_value_t = 1.0)]
    pub subgaussian: f64,
    /// Monte Carlo sample paths per grid point.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LogregArgs {
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200,400")]
    pub n_grid: Vec<usize>,
    /// Independent training runs per sample size.
    #[arg(long = "N", default_value_t = 5000)]
    pub runs: usize,
    /// Neighbour count of the estimator.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Held-out points per run for the population risk.
    #[arg(long, default_value_t = 10_000)]
    pub test_size: usize,
    /// Sample indices whose estimates are averaged.
    #[arg(long, default_value_t = 25)]
    pub pooled_indices: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelftestArgs {
    /// Random joints in the chain-rule check.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Override the recorded thread count.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Mean(_) => "mean",
            Command::Gp(_) => "gp",
            Command::GpNoisy(_) => "gp-noisy",
            Command::Sgld(_) => "sgld",
            Command::Logreg(_) => "logreg",
            Command::Selftest(_) => "selftest",
            Command::Replay(_) => "replay",
        }
    }

    pub fn common(&self) -> Option<&CommonArgs> {
        match self {
            Command::Mean(a) => Some(&a.common),
            Command::Gp(a) => Some(&a.common),
            Command::GpNoisy(a) => Some(&a.common),
            Command::Sgld(a) => Some(&a.common),
            Command::Logreg(a) => Some(&a.common),
            Command::Selftest(a) => Some(&a.common),
            Command::Replay(_) => None,
        }
    }

    /// Fully resolved argument list, defaults included.
    pub fn command_line(&self) -> Vec<String> {
        let mut out = vec!["ismi".to_string(), self.name().to_string()];
        match self {
            Command::Mean(a) => {
                push(&mut out, "--n-grid", join(&a.n_grid));
                push(&mut out, "--trials", a.trials);
                push(&mut out, "--d", a.d);
                push(&mut out, "--sigma-sq", a.sigma_sq);
                a.common.push_args(&mut out);
            }
            Command::Gp(a) => {
                push(&mut out, "--n-grid", join(&a.n_grid));
                push(&mut out, "--trials", a.trials);
                a.common.push_args(&mut out);
            }
            Command::GpNoisy(a) => {
                push(&mut out, "--n-grid", join(&a.n_grid));
                push(&mut out, "--trials", a.trials);
                push(&mut out, "--epsilon", a.epsilon);
                a.common.push_args(&mut out);
            }
            Command::Sgld(a) => {
                push(&mut out, "--n-grid", join(&a.n_grid));
                push(&mut out, "--epochs", join(&a.epochs));
                push(&mut out, "--c", a.c);
                push(&mut out, "--lipschitz", a.lipschitz);
                push(&mut out, "--subgaussian", a.subgaussian);
                push(&mut out, "--trials", a.trials);
                a.common.push_args(&mut out);
            }
            Command::Logreg(a) => {
                push(&mut out, "--n-grid", join(&a.n_grid));
                push(&mut out, "--N", a.runs);
                push(&mut out, "--k", a.k);
                push(&mut out, "--test-size", a.test_size);
                push(&mut out, "--pooled-indices", a.pooled_indices);
                a.common.push_args(&mut out);
            }
            Command::Selftest(a) => {
                push(&mut out, "--trials", a.trials);
                a.common.push_args(&mut out);
            }
            Command::Replay(a) => {
                out.push(a.manifest.display().to_string());
                if let Some(dir) = &a.out_dir {
                    push(&mut out, "--out-dir", dir.display());
                }
                if let Some(t) = a.threads {
                    push(&mut out, "--threads", t);
                }
            }
        }
        out
    }
}
