//! The `moat` command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
//! The default data root is `$MOAT_DATA_DIR`, falling back to `./data`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use moat_cli::commands::{self, Method};
use moat_cli::config::load_config;
use moat_cli::dataset::Split;
use moat_cli::error::CliError;
use moat_core::training::{Optimizer, TrainConfig};

#[derive(Parser)]
#[command(name = "moat", version, about = "Mixture-of-all-trees density estimation")]
struct Cli {
    /// Worker threads for batch evaluation (default: all cores). Results
    /// are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// Data root containing <dataset>.{ts,valid,test}.data files.
    #[arg(long, default_value_os_t = default_data_dir())]
    data_dir: PathBuf,

    /// Dataset name, e.g. "nltcs".
    #[arg(long)]
    dataset: String,
}

#[derive(Args)]
struct ConfigArgs {
    /// Optional key=value config file (batch_size, learning_rate, epochs,
    /// seed, smoothing, optimizer).
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    batch_size: Option<usize>,

    #[arg(long)]
    lr: Option<f64>,

    #[arg(long)]
    epochs: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    smoothing: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<TrainConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => load_config(path)?,
            None => TrainConfig { optimizer: Optimizer::Sgd, ..TrainConfig::default() },
        };
        if let Some(b) = self.batch_size {
            config.batch_size = b;
        }
        if let Some(lr) = self.lr {
            config.learning_rate = lr;
        }
        if let Some(e) = self.epochs {
            config.epochs = e;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(a) = self.smoothing {
            config.smoothing = a;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a model; writes model.json, history.csv, manifest.json.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print a split's mean log-likelihood under a trained model.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        /// Which split to evaluate: train, valid, or test.
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Per-row log-likelihoods of a data file, as CSV.
    Loglik {
        #[arg(long)]
        model: PathBuf,
        /// A single .data file.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw full samples from a trained model, as CSV rows.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate posterior marginals given evidence.
    Infer {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated var=value pairs, e.g. "3=1,7=0"; empty for none.
        #[arg(long, default_value = "")]
        evidence: String,
        /// is, collapsed, or gibbs.
        #[arg(long, default_value = "collapsed")]
        method: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Discarded Gibbs sweeps.
        #[arg(long, default_value_t = 100)]
        burn_in: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a normalized importance-weight histogram (is only).
        #[arg(long)]
        weights_out: Option<PathBuf>,
    },
    /// KL convergence curves for all methods vs the exact posterior.
    Converge {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "")]
        evidence: String,
        /// Largest sample budget on the curve.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        /// Number of independent seeds per method.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deterministic- vs random-initialization training curves.
    Ablate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the small-scale oracle equivalence suite.
    OracleCheck,
}

fn default_data_dir() -> PathBuf {
    std::env::var_os("MOAT_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Train { data, config, out } => commands::cmd_train(&commands::TrainArgs {
            data_dir: data.data_dir,
            dataset: data.dataset,
            config: config.resolve()?,
            out_dir: out,
        }),
        Command::Eval { data, model, split } => {
            let split = match split.as_str() {
                "train" => Split::Train,
                "valid" => Split::Valid,
                "test" => Split::Test,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown split {other:?} (expected train, valid, or test)"
                    )))
                }
            };
            commands::cmd_eval(&commands::EvalArgs {
                model,
                data_dir: data.data_dir,
                dataset: data.dataset,
                split,
            })
        }
        Command::Loglik { model, data, out } => {
            commands::cmd_loglik(&commands::LoglikArgs { model, data, out })
        }
        Command::Sample { model, samples, seed, out } => {
            commands::cmd_sample(&commands::SampleArgs { model, samples, seed, out })
        }
        Command::Infer {
            model,
            evidence,
            method,
            samples,
            burn_in,
            seed,
            out,
            weights_out,
        } => commands::cmd_infer(&commands::InferArgs {
            model,
            evidence,
            method: Method::parse(&method)?,
            samples,
            burn_in,
            seed,
            out,
            weights_out,
        }),
        Command::Converge { model, evidence, samples, burn_in, seeds, seed, out } => {
            commands::cmd_converge(&commands::ConvergeArgs {
                model,
                evidence,
                max_samples: samples,
                burn_in,
                n_seeds: seeds,
                seed,
                out,
            })
        }
        Command::Ablate { data, config, runs, out } => {
            commands::cmd_ablate(&commands::AblateArgs {
                data_dir: data.data_dir,
                dataset: data.dataset,
                config: config.resolve()?,
                runs,
                out,
            })
        }
        Command::OracleCheck => commands::cmd_oracle_check(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
