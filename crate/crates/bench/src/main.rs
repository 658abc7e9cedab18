use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use minimax_bench::certify::certify;
use minimax_bench::check::check_problem;
use minimax_bench::config::ProblemConfig;
use minimax_bench::{run_experiment, ExperimentConfig, RunOverrides};

#[derive(Parser)]
#[command(name = "minimax-bench", version, about = "Run and check minimax solver benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm of a config; writes CSVs, summaries and index.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        parallel: Option<usize>,
        /// Override ℓ of a Du problem.
        #[arg(long)]
        ell: Option<f64>,
        /// Override ρ of a Du problem.
        #[arg(long)]
        rho: Option<f64>,
        /// Override the Hessian Lipschitz constant of P for a Du problem.
        #[arg(long)]
        h_lip: Option<f64>,
    },
    /// Finite-difference and (for Du) catalog and continuity checks.
    CheckProblem {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Re-validate the certificate of a recorded run.
    Certify {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_path(path).with_context(|| format!("loading {}", path.display()))
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, out, seed, parallel, ell, rho, h_lip } => {
            let mut cfg = load(&config)?;
            if ell.is_some() || rho.is_some() || h_lip.is_some() {
                let ProblemConfig::Du(du) = &mut cfg.problem else {
                    anyhow::bail!("--ell/--rho/--h-lip apply to Du problems only");
                };
                du.constants.ell = ell.or(du.constants.ell);
                du.constants.rho = rho.or(du.constants.rho);
                du.constants.h_lip = h_lip.or(du.constants.h_lip);
            }
            let report = run_experiment(&cfg, &out, RunOverrides { seed, parallel })?;
            for s in &report.summaries {
                let status = s.status.as_ref().map(|st| format!("{st:?}")).unwrap_or_else(|| "failed".into());
                let gap = s.final_gap.map(|g| format!("{g:.3e}")).unwrap_or_else(|| "-".into());
                println!(
                    "{:<16} {:<16} outer={:<8} gap={:<10} t={:.2}s{}",
                    s.algorithm,
                    status,
                    s.outer_iterations,
                    gap,
                    s.wall_time_s,
                    s.error.as_deref().map(|e| format!("  error: {e}")).unwrap_or_default()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckProblem { config, points } => {
            let report = check_problem(&load(&config)?, points)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Certify { trajectory, config } => {
            let report = certify(&trajectory, &load(&config)?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.valid { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
