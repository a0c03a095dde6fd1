//! `etud`: learn edge-type usefulness weights for a heterogeneous network,
//! project it to a weighted homogeneous graph, detect communities, and
//! evaluate searching cost and within-community ranking quality.

mod cmd_detect;
mod cmd_evaluate;
mod cmd_generate;
mod cmd_learn;
mod cmd_report;
mod report;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use etud_core::ga::GaConfig;
use etud_core::ppr::PprConfig;
use etud_core::synth::SynthConfig;

const SEED_HELP: &str = "Master seed. Per-stage seeds derive as \
splitmix64(seed ^ splitmix64(tag)) with tags synth=1, split=2, learn=3, \
detect=4; when omitted, the config-file seeds (or their defaults) apply.";

#[derive(Parser)]
#[command(name = "etud", version, about)]
struct Cli {
    #[arg(long, global = true, help = SEED_HELP)]
    seed: Option<u64>,

    /// JSON config file with optional "synth", "ga", and "ppr" sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for parallel fitness evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic heterogeneous music network with planted taste
    /// groups, plus listening history and a train/test user split.
    Generate(cmd_generate::GenerateArgs),
    /// Learn edge-type usefulness weights with the genetic algorithm.
    Learn(cmd_learn::LearnArgs),
    /// Detect communities on the (optionally ETUD-projected) graph.
    Detect(cmd_detect::DetectArgs),
    /// Score a partition: searching cost and within-community NDCG.
    Evaluate(cmd_evaluate::EvaluateArgs),
    /// Merge evaluation records into one comparison table.
    Report(cmd_report::ReportArgs),
}

/// Optional config file; missing sections fall back to defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub synth: SynthConfig,
    pub ga: GaConfig,
    pub ppr: PprConfig,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    #[arg(skip)]
    pub seed: Option<u64>,
    #[arg(skip)]
    pub config: Option<PathBuf>,
}

impl GlobalOpts {
    pub fn load_config(&self) -> Result<FileConfig> {
        match &self.config {
            None => Ok(FileConfig::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config file {}", path.display()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: setting up {threads} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let global = GlobalOpts {
        seed: cli.seed,
        config: cli.config,
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate::run(&global, args),
        Command::Learn(args) => cmd_learn::run(&global, args),
        Command::Detect(args) => cmd_detect::run(&global, args),
        Command::Evaluate(args) => cmd_evaluate::run(&global, args),
        Command::Report(args) => cmd_report::run(&global, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
