use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use sirpdoa::{run_experiment, ExperimentConfig, RunMetadata};
use sirpdoa_core::oracle;

#[derive(Parser)]
#[command(
    name = "sirpdoa",
    about = "Direction-of-arrival estimation benchmarks under compound-Gaussian (SIRP) noise",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo MSE-vs-SNR experiment from a JSON config.
    Run {
        /// Experiment configuration file (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for results.csv and results_meta.json.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        parallel: Option<usize>,
        /// Also emit plot_data.csv with log10-MSE series per estimator.
        #[arg(long)]
        plot_data: bool,
    },
    /// Parse and validate a configuration file, reporting every problem.
    ValidateConfig { config: PathBuf },
    /// Run a brute-force verification suite
    /// (closed-form | texture | noise | theta | all).
    Oracle { suite: String },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            parallel,
            plot_data,
        } => {
            if let Some(threads) = parallel {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()?;
            }
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            let experiment = cfg.resolve()?;
            let started = Instant::now();
            let results = run_experiment(&experiment)?;
            let wall = started.elapsed().as_secs_f64();
            for warning in &results.warnings {
                eprintln!("warning: {warning}");
            }
            let metadata = RunMetadata {
                config: serde_json::to_value(&cfg)?,
                master_seed: experiment.master_seed,
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                wall_seconds: wall,
                finished_unix_seconds: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                warnings: results.warnings.clone(),
            };
            sirpdoa::write_results(&results.table, &metadata, &out, plot_data)?;
            println!("{:>8} {:>8} {:>14} {:>7} {:>7}", "snr_db", "est", "mse_deg2", "ok", "fail");
            for row in &results.table.rows {
                println!(
                    "{:>8} {:>8} {:>14.6e} {:>7} {:>7}",
                    row.snr_db, row.estimator, row.mse_deg2, row.trials, row.failed_trials
                );
            }
            println!(
                "wrote {} ({} rows) in {wall:.1}s",
                out.join("results.csv").display(),
                results.table.rows.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateConfig { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let errors = cfg.validation_errors();
            if errors.is_empty() {
                let resolved = cfg.resolve()?;
                println!(
                    "OK: {} sensors, {} sources, {} snapshots, {} SNR points x {} trials, estimators [{}]",
                    resolved.geometry.sensors(),
                    resolved.truth.len(),
                    resolved.snapshots,
                    resolved.snr_grid_db.len(),
                    resolved.trials,
                    resolved.estimator_names.join(", ")
                );
                Ok(ExitCode::SUCCESS)
            } else {
                for e in &errors {
                    eprintln!("invalid: {e}");
                }
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Oracle { suite } => {
            let checks = oracle::run_suite(&suite)?;
            let mut failed = 0;
            for check in &checks {
                println!(
                    "{} {} ({})",
                    if check.passed { "ok  " } else { "FAIL" },
                    check.name,
                    check.detail
                );
                if !check.passed {
                    failed += 1;
                }
            }
            println!("{} checks, {} failed", checks.len(), failed);
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
