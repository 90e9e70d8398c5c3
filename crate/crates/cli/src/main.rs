mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conceptor_debias::subspace::SubspaceMode;
use conceptor_debias::Error;

use commands::ComposeOp;
use config::{config_error, ConfigError, PipelineArgs, PipelineConfig};

/// Conceptor bias subspaces, debiasing and bias metrics.
///
/// Exit codes: 0 success, 2 configuration error, 3 data or format error,
/// 4 numerical degeneracy.
#[derive(Parser)]
#[command(name = "cdebias", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a bias conceptor and its negation from token embeddings
    Build(PipelineArgs),
    /// Combine conceptor files with NOT, AND or OR
    Compose {
        #[arg(value_enum)]
        op: ComposeOp,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Project every vector of a CEMB collection through a conceptor
    Debias {
        /// Conceptor to apply (usually the `.not.ccon` negation)
        #[arg(long)]
        conceptor: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// SEAT effect sizes and p-values for raw and debiased embeddings
    Seat {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Conceptor applied to sentence vectors; one report row each
        #[arg(long = "conceptor")]
        conceptors: Vec<PathBuf>,
    },
    /// WinoBias skew and stereotype from four F1 scores
    Winobias {
        #[arg(long)]
        pro_male: f64,
        #[arg(long)]
        anti_male: f64,
        #[arg(long)]
        pro_female: f64,
        #[arg(long)]
        anti_female: f64,
        #[arg(long)]
        json: bool,
    },
    /// SEAT table over percentiles 0.1..1.0 and subspace modes
    Sweep {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Modes to sweep (default: every mode whose wordlists are configured)
        #[arg(long = "modes", value_delimiter = ',')]
        modes: Vec<String>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Build(args) => commands::build(&PipelineConfig::load(&args, &[])?),
        Command::Compose { op, inputs, output } => commands::compose(op, &inputs, &output),
        Command::Debias {
            conceptor,
            input,
            output,
        } => commands::debias(&conceptor, &input, &output),
        Command::Seat { pipeline, conceptors } => commands::seat(&PipelineConfig::load(&pipeline, &conceptors)?),
        Command::Winobias {
            pro_male,
            anti_male,
            pro_female,
            anti_female,
            json,
        } => commands::winobias(pro_male, anti_male, pro_female, anti_female, json),
        Command::Sweep { pipeline, modes } => {
            let modes = modes
                .iter()
                .map(|m| m.parse::<SubspaceMode>().map_err(|e| config_error(e.to_string())))
                .collect::<anyhow::Result<Vec<_>>>()?;
            commands::sweep(&PipelineConfig::load(&pipeline, &[])?, &modes)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Parameter(_) => 2,
                Error::Degenerate(_) | Error::ZeroVector { .. } => 4,
                _ => 3,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 3;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
