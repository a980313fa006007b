//! Operator command line for the living-needs prediction system.

mod commands;
mod manifest;
mod requests;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use neon::Error;

/// Exit codes: 0 success, 1 usage, 2 data validation, 3 numerical failure.
const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "neon",
    about = "Living-needs prediction: synthesize worlds, build features, train, evaluate, score, and allocate quotas",
    version
)]
struct Cli {
    /// Suppress progress output on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world: corpus, profiles, and ground truth.
    Synth {
        /// World config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the feature schema and group tables from a corpus.
    BuildFeatures {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        profiles: PathBuf,
        /// Output file for the feature document.
        #[arg(long)]
        out: PathBuf,
        /// Train share used to select the fitting records.
        #[arg(long, default_value_t = 0.8)]
        split_fraction: f64,
        /// Split seed (must match the training run to share features).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fit on every record instead of the train partition.
        #[arg(long)]
        all: bool,
    },
    /// Train a model end to end.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        profiles: PathBuf,
        /// Training config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (checkpoint, features, loss trace, manifest).
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Head wiring: multitask or single_task_sum.
        #[arg(long, default_value = "multitask")]
        variant: String,
        /// Ablation: zero the spatiotemporal context features.
        #[arg(long)]
        drop_st: bool,
        /// Ablation: zero the group behavior features.
        #[arg(long)]
        drop_group: bool,
    },
    /// Evaluate a checkpoint on the eval split of a corpus.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        profiles: PathBuf,
        /// Training config JSON (for the split fraction and seed).
        #[arg(long)]
        config: Option<PathBuf>,
        /// World ground truth; adds the oracle comparison when given.
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config split seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score scenes (JSON-lines) in one batch.
    Score {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Scene JSON-lines file; stdin when omitted.
        #[arg(long)]
        scenes: Option<PathBuf>,
        /// Output directory; responses go to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer quota requests (JSON-lines).
    Quota {
        /// Needed only for requests that carry scenes instead of scores.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        /// Request JSON-lines file; stdin when omitted.
        #[arg(long)]
        requests: Option<PathBuf>,
        /// Output directory; responses go to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stream scene JSON-lines from stdin to scored JSON-lines on stdout.
    Serve {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Attach pure-model homepage quotas to every response.
        #[arg(long, default_value_t = true)]
        quotas: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful exits.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };

    let quiet = cli.quiet;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if !quiet {
                if let Error::Validation(_) = &err {
                    eprintln!("hint: run with --help for usage");
                }
            }
            match err {
                Error::Numerical(_) => ExitCode::from(EXIT_NUMERICAL),
                _ => ExitCode::from(EXIT_DATA),
            }
        }
    }
}

fn run(cli: Cli) -> neon::Result<()> {
    match cli.command {
        Command::Synth { config, out, seed } => commands::synth::run(config, out, seed, cli.quiet),
        Command::BuildFeatures {
            corpus,
            profiles,
            out,
            split_fraction,
            seed,
            all,
        } => commands::features::run(corpus, profiles, out, split_fraction, seed, all, cli.quiet),
        Command::Train {
            corpus,
            profiles,
            config,
            out,
            seed,
            variant,
            drop_st,
            drop_group,
        } => commands::train::run(
            corpus, profiles, config, out, seed, &variant, drop_st, drop_group, cli.quiet,
        ),
        Command::Eval {
            checkpoint,
            features,
            corpus,
            profiles,
            config,
            world,
            out,
            seed,
        } => commands::eval::run(
            checkpoint, features, corpus, profiles, config, world, out, seed, cli.quiet,
        ),
        Command::Score {
            checkpoint,
            features,
            scenes,
            out,
        } => commands::score::run(checkpoint, features, scenes, out),
        Command::Quota {
            checkpoint,
            features,
            requests,
            out,
        } => commands::quota::run(checkpoint, features, requests, out),
        Command::Serve {
            checkpoint,
            features,
            quotas,
        } => commands::serve::run(checkpoint, features, quotas),
    }
}
