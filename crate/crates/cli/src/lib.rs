//! Command-line front end. Every subcommand is a thin wrapper over the
//! `handforge` library; `main_with_args` maps failures to exit codes
//! (1 for usage errors, 2 for runtime errors).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod ablate;
mod annotate;
mod config;
mod eval;
mod generate;
mod preview;
mod train;

pub use config::FileConfig;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Bad flags or values; reported with exit code 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "handforge", version, about = "Synthetic robot-hand segmentation data: generate, train, evaluate, annotate")]
pub struct Cli {
    /// TOML config file. Values in it replace built-in defaults; flags given
    /// on the command line replace both.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic dataset for one preset.
    Generate(generate::GenerateArgs),
    /// Train the per-pixel reference segmenter on a generated dataset.
    Train(train::TrainArgs),
    /// Score a checkpoint (or the ground truth itself) on a dataset.
    Eval(eval::EvalArgs),
    /// Combine evaluation reports into a train-preset x eval-set grid, or
    /// run the whole A..F ablation.
    Ablate(ablate::AblateArgs),
    /// Serve the annotation tool over a directory of real images.
    Annotate(annotate::AnnotateArgs),
    /// Render one sampled scene with its hand mask and an overlay.
    Preview(preview::PreviewArgs),
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Generate(a) => generate::run(a, &cfg),
        Command::Train(a) => train::run(a, &cfg),
        Command::Eval(a) => eval::run(a, &cfg),
        Command::Ablate(a) => ablate::run(a, &cfg),
        Command::Annotate(a) => annotate::run(a, &cfg),
        Command::Preview(a) => preview::run(a, &cfg),
    }
}

/// Join the error chain, skipping causes already spelled out by the
/// message above them.
fn render_chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if out.contains(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
    }
    out
}

/// Parse, run and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", render_chain(&e));
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}
