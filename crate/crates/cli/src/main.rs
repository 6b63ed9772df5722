mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use solarcast::error::ErrorKind;
use solarcast::forest::MaxFeatures;
use solarcast::preprocess::{Season, SplitMode};
use solarcast::HeaderMode;

/// Two-stage solar irradiance forecasting and PV energy simulation.
#[derive(Debug, Parser)]
#[command(name = "solarcast", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a dataset, write its summary table and validation report.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        /// Summary table path; the validation report is written next to it.
        #[arg(long, default_value = "output/summary.csv")]
        summary: PathBuf,
    },
    /// Align, filter and split a dataset into train/test/validation CSVs.
    Preprocess {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train one seasonal two-stage pipeline.
    Train {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "annual")]
        season: Season,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Score a trained pipeline on its test split or the validation year.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "test")]
        split: EvalSplit,
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Season of the evaluation slice; defaults to the model's season.
        #[arg(long)]
        season: Option<Season>,
        /// Evaluate a seasonal model on data of another season.
        #[arg(long)]
        force: bool,
    },
    /// Forecast clear-sky and actual irradiance for a dataset file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "auto")]
        header_mode: HeaderMode,
    },
    /// Simulate hourly power and daily energy of a PV system.
    Simulate {
        /// Bundled system (trina, canadian) or a system TOML file.
        #[arg(long, default_value = "trina")]
        module: String,
        /// Predicted irradiance; observed irradiance from --data is used otherwise.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        /// Restrict observed irradiance to one calendar year.
        #[arg(long)]
        year: Option<i32>,
        #[arg(long, default_value = "output")]
        out: PathBuf,
    },
    /// Regenerate all result CSVs from models cached by `run`.
    Report {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Full experiment: summary, three seasonal pipelines, predictions,
    /// feature importances and energy.
    Run {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Exploratory outputs: correlation matrix and a month-by-hour pivot.
    Eda {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "daytime")]
        subset: EdaSubset,
        #[arg(long, default_value = "ghi")]
        variable: String,
        #[arg(long, default_value = "output")]
        out: PathBuf,
    },
    /// Write a synthetic Ibadan-like dataset for trying the tool.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2020)]
        first_year: i32,
        #[arg(long, default_value_t = 3)]
        years: u32,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum EvalSplit {
    Test,
    Validation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum EdaSubset {
    Daytime,
    All,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Dataset CSV file or directory of CSV files.
    #[arg(long, visible_alias = "input")]
    data: Option<PathBuf>,
    #[arg(long)]
    header_mode: Option<HeaderMode>,
}

/// Config file plus flag overrides; flags win.
#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, visible_alias = "out-dir")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    validation_year: Option<i32>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Month set such as `5-10` or `1,2,12`.
    #[arg(long)]
    wet_months: Option<String>,
    #[arg(long)]
    dry_months: Option<String>,
    #[arg(long)]
    split_mode: Option<SplitMode>,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    min_samples_leaf: Option<usize>,
    #[arg(long)]
    min_samples_split: Option<usize>,
    /// `all`, `sqrt` or a fraction in (0, 1].
    #[arg(long)]
    max_features: Option<MaxFeatures>,
    #[arg(long)]
    no_bootstrap: bool,
    /// PV systems for the energy stage (repeatable).
    #[arg(long = "system")]
    systems: Vec<String>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<solarcast::Error>())
        .map(solarcast::Error::kind);
    match kind {
        Some(ErrorKind::Usage) => 1,
        Some(ErrorKind::Model) => 3,
        _ => 2,
    }
}

fn init_logging() {
    let filter = tracing_subscriber::EnvFilter::try_from_env("SOLARCAST_LOG")
        .or_else(|_| tracing_subscriber::EnvFilter::try_from_default_env())
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_ansi(std::io::IsTerminal::is_terminal(&std::io::stderr()))
        .with_target(false)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    init_logging();
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
