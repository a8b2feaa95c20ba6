//! Command-line front end: run experiments, sweep parameters, validate
//! configs and emit the 1D closed-form reference curves.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 fit failure,
//! 4 observation-time threshold violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use enclosure_core::error::Error;
use enclosure_core::runner::{
    emit_reference, run_experiment, sweep, ExperimentConfig, RunOutcome,
};

#[derive(Parser)]
#[command(name = "enclosure", version, about = "Wave-based obstacle probing from finite-time data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = library default).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline for one configuration.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Override the lower end of the tau grid.
        #[arg(long)]
        tau_min: Option<f64>,
        /// Override the upper end of the tau grid.
        #[arg(long)]
        tau_max: Option<f64>,
        /// Override the number of tau samples.
        #[arg(long)]
        tau_count: Option<usize>,
    },
    /// Run one experiment per value of a swept config parameter.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Dotted path of the parameter inside the config (e.g. scene.gamma).
        #[arg(long)]
        param: String,
        /// Comma-separated values (JSON scalars).
        #[arg(long)]
        values: String,
    },
    /// Validate a configuration and report the first violated hypothesis.
    Validate {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the 1D closed-form reference curves without simulation.
    EmitReference {
        #[command(flatten)]
        common: CommonArgs,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_FIT: u8 = 3;
const EXIT_THRESHOLD: u8 = 4;

fn exit_for_error(e: &Error) -> u8 {
    match e {
        Error::Window(_) | Error::NoDecay(_) | Error::Recovery(_) | Error::Pole(_) => EXIT_FIT,
        Error::Io(_) => 1,
        _ => EXIT_CONFIG,
    }
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_json(&text)
}

fn install_workers(workers: usize) {
    if workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { common, tau_min, tau_max, tau_count } => {
            install_workers(common.workers);
            match load_config(&common.config) {
                Ok(mut cfg) => {
                    if tau_min.is_some() {
                        cfg.tau.min = tau_min;
                    }
                    if tau_max.is_some() {
                        cfg.tau.max = tau_max;
                    }
                    if tau_count.is_some() {
                        cfg.tau.count = tau_count;
                    }
                    match run_experiment(&cfg, &common.out) {
                        Ok(art) => {
                            println!("report: {}", art.report_path.display());
                            println!("curve:  {}", art.curve_path.display());
                            if let Some(d) = art.report.d_hat {
                                println!("d_hat: {d}");
                            }
                            println!("sign: {}", art.report.sign_meaning);
                            if let Some(g) = art.report.gamma_hat {
                                println!("gamma_hat: {g}");
                            }
                            if let Some(b) = art.report.beta_hat {
                                println!("beta_hat: {b}");
                            }
                            match art.outcome {
                                RunOutcome::Success => 0,
                                RunOutcome::FitFailure => {
                                    eprintln!("fit failure: see report notes");
                                    EXIT_FIT
                                }
                                RunOutcome::ThresholdViolation => {
                                    eprintln!(
                                        "threshold violation: T = {} <= {}",
                                        art.report.t_used, art.report.t_min_required
                                    );
                                    EXIT_THRESHOLD
                                }
                            }
                        }
                        Err(e) => {
                            eprintln!("error: {e}");
                            exit_for_error(&e)
                        }
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            }
        }
        Command::Sweep { common, param, values } => {
            install_workers(common.workers);
            let parsed: Vec<serde_json::Value> = values
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    serde_json::from_str(s.trim())
                        .unwrap_or_else(|_| serde_json::Value::String(s.trim().to_string()))
                })
                .collect();
            let template = match std::fs::read_to_string(&common.config)
                .map_err(Error::from)
                .and_then(|t| serde_json::from_str(&t).map_err(Error::from))
            {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            match sweep(&template, &param, &parsed, &common.out, common.workers.max(1)) {
                Ok(rows) => {
                    println!("sweep table: {}", common.out.join("sweep.csv").display());
                    for r in &rows {
                        println!("{} -> {}", r.value, r.status);
                    }
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_for_error(&e)
                }
            }
        }
        Command::Validate { config } => match load_config(&config) {
            Ok(cfg) => match cfg.scene.validate().and_then(|_| cfg.resolve_time().map(|_| ())) {
                Ok(()) => {
                    println!("config ok");
                    0
                }
                Err(e) => {
                    eprintln!("invalid: {e}");
                    EXIT_CONFIG
                }
            },
            Err(e) => {
                eprintln!("invalid: {e}");
                EXIT_CONFIG
            }
        },
        Command::EmitReference { common } => match load_config(&common.config) {
            Ok(cfg) => match emit_reference(&cfg, &common.out) {
                Ok(path) => {
                    println!("reference: {}", path.display());
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_for_error(&e)
                }
            },
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
    };
    ExitCode::from(code)
}
