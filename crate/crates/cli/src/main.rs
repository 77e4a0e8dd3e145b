//! `ivtr`: detector transferability experiments from the command line.

mod commands;
mod config;
mod io;
mod svg;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ivtr_core::corpus_io::CorpusError;
use ivtr_core::inversion::InversionError;
use ivtr_core::stylocheck::StyloError;
use ivtr_core::synthlab::SynthError;

use crate::config::RunConfig;
use crate::tables::SchemaError;

#[derive(Debug, Parser)]
#[command(name = "ivtr", version, about = "Feature-inversion analysis of MGT detector transfer")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Fail on detector inputs that would otherwise be clamped.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic corpus with planted geometry.
    Synth(commands::synth::Args),
    /// Per-subset AUROC of every configured detector.
    Detect(commands::detect::Args),
    /// Extract the inverted feature direction.
    Invert(commands::invert::Args),
    /// Correlate per-subset feature gaps with detector AUROCs.
    Featval(commands::featval::Args),
    /// Token-shuffled variants over a tau grid.
    Shuffle(commands::shuffle::Args),
    /// Held-out MGT probe AUROC per module tag and domain.
    ProbeSweep(commands::probe_sweep::Args),
    /// Probe-based transferability check.
    Stylocheck(commands::stylocheck::Args),
    /// SVG figures and a text summary from run outputs.
    Report(commands::report::Args),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global()?;
    if let Command::Report(args) = &cli.command {
        return commands::report::run(args);
    }
    let cfg = RunConfig::load(cli.config.as_deref())?.finish(cli.seed, cli.strict)?;
    match &cli.command {
        Command::Synth(a) => commands::synth::run(a, &cfg),
        Command::Detect(a) => commands::detect::run(a, &cfg),
        Command::Invert(a) => commands::invert::run(a, &cfg),
        Command::Featval(a) => commands::featval::run(a, &cfg),
        Command::Shuffle(a) => commands::shuffle::run(a, &cfg),
        Command::ProbeSweep(a) => commands::probe_sweep::run(a, &cfg),
        Command::Stylocheck(a) => commands::stylocheck::run(a, &cfg),
        Command::Report(_) => unreachable!(),
    }
}

/// 3 for bad data, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let corpus = |e: &(dyn std::error::Error + 'static)| -> Option<bool> {
        if let Some(c) = e.downcast_ref::<CorpusError>() {
            return Some(c.is_data_violation());
        }
        if let Some(StyloError::Corpus(c) | StyloError::Inversion(InversionError::Corpus(c))) = e.downcast_ref() {
            return Some(c.is_data_violation());
        }
        if let Some(InversionError::Corpus(c)) = e.downcast_ref() {
            return Some(c.is_data_violation());
        }
        if let Some(SynthError::Corpus(c)) = e.downcast_ref() {
            return Some(c.is_data_violation());
        }
        e.downcast_ref::<SchemaError>().map(|_| true)
    };
    let data = err.chain().any(|e| corpus(e) == Some(true));
    if data {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("IVTR_LOG", "warn"))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Some errors already print their source; skip the repeat.
            let mut msg = String::new();
            for cause in e.chain().map(ToString::to_string) {
                if !msg.ends_with(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}
