use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qrobust::experiments::{
    cmd_cert_map, cmd_compare_embeddings, cmd_solve_channel, cmd_sweep_dep, cmd_table2, cmd_train, cmd_validate_channel, Report,
};
use qrobust::{Error, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "qrobust", version, about = "Adversarial robustness experiments for noisy quantum classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 picks the number of CPUs).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the classifier and write a checkpoint.
    Train(Common),
    /// Adversarial accuracy under depolarizing and optimal channels.
    SweepDep(Common),
    /// Certified portions over the (alpha, gamma) grid.
    CertMap(Common),
    /// Normalized accuracy curves for several embeddings.
    CompareEmbeddings(Common),
    /// Adversarial accuracy of the optimal channel for each (alpha, gamma) pair.
    Table2(Common),
    /// Solve the channel SDP at the configured (alpha, gamma).
    SolveChannel(Common),
    /// Check a stored channel against the channel constraints.
    ValidateChannel {
        #[command(flatten)]
        common: Common,
        /// Channel JSON file.
        #[arg(long)]
        channel: PathBuf,
    },
}

fn load(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(out) = &c.out {
        let cwd = std::env::current_dir().map_err(|e| Error::io(".", e))?;
        cfg.out = cwd.join(out);
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Report> {
    match cli.command {
        Command::Train(c) => cmd_train(&load(&c)?),
        Command::SweepDep(c) => cmd_sweep_dep(&load(&c)?),
        Command::CertMap(c) => cmd_cert_map(&load(&c)?),
        Command::CompareEmbeddings(c) => cmd_compare_embeddings(&load(&c)?),
        Command::Table2(c) => cmd_table2(&load(&c)?),
        Command::SolveChannel(c) => cmd_solve_channel(&load(&c)?),
        Command::ValidateChannel { common, channel } => cmd_validate_channel(&load(&common)?, &channel),
    }
}

fn main() -> ExitCode {
    let result = run(Cli::parse()).and_then(|report| {
        // a closed pipe (e.g. `| head`) must not turn a finished run into a failure
        let mut out = std::io::stdout().lock();
        for line in &report.summary {
            let _ = writeln!(out, "{line}");
        }
        for f in &report.files {
            let _ = writeln!(out, "wrote {}", f.display());
        }
        report.into_result()
    });
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
