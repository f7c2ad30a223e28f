//! `qprep` — run state-preparation and classifier-robustness studies
//! from a single JSON configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qprep_cli::runs;
use qprep_cli::{CliError, CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "qprep",
    version,
    about = "Approximate quantum state preparation and classifier robustness workbench"
)]
struct Cli {
    /// JSON experiment configuration (required by every run command).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; defaults to the config's `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize preparation circuits for a few test images and write
    /// them as JSON/OpenQASM.
    Prepare,
    /// Train the quantum classifier and the pixel surrogate.
    Train,
    /// Craft PGD attacks and score every classifier variant on them.
    Attack,
    /// Benchmark CNOT counts of every method against the exact baseline.
    BenchDepth,
    /// Sweep uniform pixel noise: encoded fidelity vs accuracy.
    BenchNoise,
    /// Sweep depolarizing noise on the preparation circuits.
    BenchDepol,
    /// Print the headline numbers already in the output directory.
    Report,
}

fn effective_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::MissingInput("--config <path> is required".into()))?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn run(cli: &Cli) -> CliResult<String> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }

    if let Command::Report = cli.command {
        let out = match (&cli.out, &cli.config) {
            (Some(out), _) => out.clone(),
            (None, Some(_)) => effective_config(cli)?.output_dir,
            (None, None) => {
                return Err(CliError::MissingInput(
                    "report needs --out (or --config naming an output_dir)".into(),
                ))
            }
        };
        return runs::run_report(&out);
    }

    let config = effective_config(cli)?;
    let out = config.output_dir.clone();
    let summary = match cli.command {
        Command::Prepare => {
            let outcome = runs::run_prepare(&config, &out)?;
            let met = outcome.rows.iter().filter(|(_, r)| r.met_target).count();
            format!(
                "prepare: {} circuits written, {met} met the fidelity target",
                outcome.rows.len()
            )
        }
        Command::Train => {
            let outcome = runs::run_train(&config, &out)?;
            format!(
                "train: qvc accuracy {:.3} (train) / {:.3} (test), surrogate {:.3} (test)",
                outcome.train_accuracy, outcome.test_accuracy, outcome.surrogate_test_accuracy
            )
        }
        Command::Attack => {
            let outcome = runs::run_transfer_attack(&config, &out)?;
            format!("attack: {} rows in attack/transfer.csv", outcome.rows.len())
        }
        Command::BenchDepth => {
            let outcome = runs::run_depth_benchmark(&config, &out)?;
            let medians: Vec<String> = outcome
                .medians
                .iter()
                .map(|(m, v)| format!("{m}={v}"))
                .collect();
            format!("bench-depth: median CNOTs {}", medians.join(", "))
        }
        Command::BenchNoise => {
            let outcome = runs::run_noise_robustness(&config, &out)?;
            format!("bench-noise: {} grid points in noise/noise.csv", outcome.rows.len())
        }
        Command::BenchDepol => {
            let outcome = runs::run_depolarizing_sweep(&config, &out)?;
            format!("bench-depol: {} rows in depol/depol.csv", outcome.rows.len())
        }
        Command::Report => unreachable!("handled above"),
    };
    Ok(format!("{summary}\nartifacts: {}", out.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
