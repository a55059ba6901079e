use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use correg_cli::commands::{self, Output};
use correg_cli::{CliError, ExperimentConfig};

/// Kernel regression experiments with replicated, correlated observations.
#[derive(Debug, Parser)]
#[command(name = "correg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; omitted fields take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Table to regenerate (1 to 10), for `repro-table`.
    #[arg(long, global = true)]
    table: Option<u8>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Average simulated estimator curves and write them next to g.
    Estimate,
    /// Exact integrated bias, variance and IMSE per bandwidth.
    Risk,
    /// Exact-IMSE bandwidth grid search.
    BandwidthSearch,
    /// Asymptotically optimal bandwidth and sampling design.
    Optimal,
    /// Fit the generalized Ornstein-Uhlenbeck covariance by annealing.
    FitCov,
    /// Regenerate a published table with deviations.
    ReproTable,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let cfg = load(cli)?;
    let Output { data, summary } = match cli.command {
        Command::Estimate => commands::estimate(&cfg)?,
        Command::Risk => commands::risk(&cfg)?,
        Command::BandwidthSearch => commands::bandwidth_search(&cfg)?,
        Command::Optimal => commands::optimal(&cfg)?,
        Command::FitCov => commands::fit_cov(&cfg)?,
        Command::ReproTable => {
            let id = cli
                .table
                .ok_or_else(|| CliError::Config("repro-table needs --table".into()))?;
            commands::repro_table(&cfg, id)?
        }
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, &data).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&data)
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    eprintln!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
