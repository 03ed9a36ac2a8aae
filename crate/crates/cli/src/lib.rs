//! `rdr`: preprocess, split, grade, train and evaluate from the command line.
//!
//! Every subcommand reads the same layered configuration: built-in
//! defaults, then `--config FILE`, then `--set key=value` overrides, then
//! `--seed`. Exit codes are 0 on success, 1 for usage or configuration
//! errors, 2 for data errors and 3 when training diverges.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{RunConfig, RUN_CONFIG_FILE};
pub use error::{CliError, EXIT_DATA, EXIT_OK, EXIT_TRAINING, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "rdr", version, about = "Referable diabetic retinopathy pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration value, e.g. `training.learning_rate=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Global seed; every other seed is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run on a single worker thread.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic fundus corpus with planted lesions.
    GenerateSynthetic {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        positive_fraction: Option<f64>,
        #[arg(long)]
        image_size: Option<u32>,
    },
    /// Localise, crop and resize every graded image.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        grades: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// eyepacs, messidor2 or synthetic.
        #[arg(long)]
        source: Option<String>,
    },
    /// Sample the test split, then train and validation.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Image-quality grades to apply before sampling.
        #[arg(long)]
        gradability: Option<PathBuf>,
    },
    /// Serve the image-quality grading backend.
    ServeGrading {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        images: PathBuf,
        /// Append-only quality grades file.
        #[arg(long)]
        grades: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "grader")]
        grader: String,
        #[arg(long, default_value = "default")]
        session: String,
        #[arg(long, default_value_t = 1)]
        shards: usize,
        /// File with grading instructions shown to graders.
        #[arg(long)]
        instructions: Option<PathBuf>,
    },
    /// Train one model on the train split.
    Train {
        #[command(flatten)]
        data: TrainArgs,
    },
    /// Train one model per ensemble seed.
    TrainEnsemble {
        #[command(flatten)]
        data: TrainArgs,
        #[arg(long)]
        members: Option<usize>,
    },
    /// Score a split with one or more checkpoints and report AUC and
    /// operating points.
    Evaluate {
        #[arg(long = "checkpoint", required = true)]
        checkpoints: Vec<PathBuf>,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        /// Test set name in the report; defaults to `evaluation.test_set_name`.
        #[arg(long)]
        name: Option<String>,
    },
    /// Render one table from several `report.json` files.
    Report {
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append the published reference figures.
        #[arg(long)]
        reference: bool,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory of preprocessed images.
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.global.config.as_deref(), &cli.global.overrides, cli.global.seed)?;
    if cli.global.deterministic {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| CliError::data(e.to_string()))?;
        pool.install(|| commands::dispatch(cli.command, cfg))
    } else {
        commands::dispatch(cli.command, cfg)
    }
}
