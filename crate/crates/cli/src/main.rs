//! Command-line entry point: dataset synthesis, full runs, standalone
//! calibration, baselines and report rendering.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentArgs;
use nasirt::pipeline::BaselineScope;

#[derive(Debug, Parser)]
#[command(
    name = "nasirt",
    version,
    about = "Grid-searched CNN zoo with IRT-based instance routing"
)]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic spectral dataset.
    Synth(SynthArgs),
    /// Train the zoo, calibrate, route and compare against the baselines.
    Run(ExperimentArgs),
    /// Calibrate a response matrix file on its own.
    IrtFit(IrtFitArgs),
    /// Single CNN and/or vote over the whole zoo only.
    Baseline {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_enum, default_value = "both")]
        scope: Scope,
    },
    /// Print the accuracy and complexity tables of a finished run.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Scope {
    Single,
    Vote,
    Both,
}

impl From<Scope> for BaselineScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::Single => BaselineScope::Single,
            Scope::Vote => BaselineScope::Vote,
            Scope::Both => BaselineScope::Both,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub classes: usize,
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    #[arg(long, default_value_t = 518)]
    pub features: usize,
    #[arg(long, default_value_t = 3)]
    pub peaks: usize,
    #[arg(long, default_value_t = 12.0)]
    pub width: f64,
    #[arg(long, default_value_t = 1.5)]
    pub noise: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, clap::Args)]
pub struct IrtFitArgs {
    /// Response matrix CSV.
    pub matrix: PathBuf,
    /// TOML file; only its `[fit]` table is read.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Drop the prior on the guessing parameter.
    #[arg(long)]
    pub no_guess_prior: bool,
    /// Drop the lognormal prior on discrimination.
    #[arg(long)]
    pub no_discrimination_prior: bool,
    #[arg(long)]
    pub waive_singularity_guard: bool,
    #[arg(long, env = config::OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ReportArgs {
    /// Run directory or its report.json.
    pub path: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Synth(a) => commands::synth(&a),
        Command::Run(a) => commands::run(&a),
        Command::IrtFit(a) => commands::irt_fit(&a),
        Command::Baseline { exp, scope } => commands::baseline(&exp, scope.into()),
        Command::Report(a) => commands::report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
