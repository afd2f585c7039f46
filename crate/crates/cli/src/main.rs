mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use qtemporal_core::verify::Fault;

use crate::commands::Run;
use crate::config::{config_error, Config, ConfigError, InitKind};
use crate::output::{Artifacts, RunManifest};

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "QTEMPORAL_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "qtemporal",
    version,
    about = "Quantum temporal network experiments"
)]
struct Cli {
    /// TOML configuration; defaults reproduce the standard experiments.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Single-threaded, fixed-order execution.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitArg {
    Zero,
    Tunneling,
    Analytic,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    /// Backward leg of the unitarity check runs with the wrong dt sign.
    DtSign,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entanglement measures for catalog states.
    Oracle {
        /// Comma-separated catalog names.
        #[arg(long, value_delimiter = ',')]
        states: Option<Vec<String>>,
        /// A single catalog name.
        #[arg(long, conflicts_with = "states")]
        state: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Train the network on the configured dataset.
    Train {
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, value_enum)]
        init: Option<InitArg>,
        /// Built-in training dataset name.
        #[arg(long)]
        dataset: Option<String>,
    },
    /// Evaluate saved weights on a dataset.
    Test {
        /// Defaults to weights.toml in the output directory.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// `test`, `train`, or a built-in dataset name.
        #[arg(long)]
        set: Option<String>,
    },
    /// Retrain while sweeping the pivot state's target.
    Sweep {
        /// Explicit grid, comma-separated; fractions like 4/9 are accepted.
        #[arg(long, value_delimiter = ',', value_parser = parse_fraction)]
        points: Option<Vec<f64>>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        rms_stop: Option<f64>,
    },
    /// Run the numerical self-checks.
    Verify {
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
    /// Classical feed-forward baseline and leave-one-out study.
    Baseline {
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Train, test, sweep, oracle and baseline in one run.
    Reproduce,
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            let d: f64 = d.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            Ok(n / d)
        }
        None => s.parse().map_err(|e| format!("{s}: {e}")),
    }
}

fn thread_count(deterministic: bool) -> Result<usize> {
    if deterministic {
        return Ok(1);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(config_error(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Folds command-line overrides into the configuration so the manifest
/// digest covers them.
fn apply_overrides(config: &mut Config, command: &Command) {
    match command {
        Command::Oracle { gamma, delta, .. } => {
            if let Some(g) = gamma {
                config.oracle.gamma = *g;
            }
            if let Some(d) = delta {
                config.oracle.delta = *d;
            }
        }
        Command::Train {
            epochs,
            init,
            dataset,
        } => {
            if let Some(e) = epochs {
                config.train.max_epochs = *e;
            }
            if let Some(i) = init {
                config.train.init = match i {
                    InitArg::Zero => InitKind::Zero,
                    InitArg::Tunneling => InitKind::Tunneling,
                    InitArg::Analytic => InitKind::Analytic,
                    InitArg::Random => InitKind::Random,
                };
            }
            if let Some(d) = dataset {
                config.train.dataset = d.clone();
                config.train.pairs.clear();
            }
        }
        Command::Sweep {
            epochs, rms_stop, ..
        } => {
            if epochs.is_some() {
                config.sweep.max_epochs = *epochs;
            }
            if rms_stop.is_some() {
                config.sweep.rms_stop = *rms_stop;
            }
        }
        Command::Baseline { epochs: Some(e) } => config.baseline.max_epochs = *e,
        _ => {}
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Oracle { .. } => "oracle",
        Command::Train { .. } => "train",
        Command::Test { .. } => "test",
        Command::Sweep { .. } => "sweep",
        Command::Verify { .. } => "verify",
        Command::Baseline { .. } => "baseline",
        Command::Reproduce => "reproduce",
    }
}

/// Exit status on success or on a failed verification.
fn execute(cli: Cli) -> Result<ExitCode> {
    let start = Instant::now();
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    apply_overrides(&mut config, &cli.command);
    let run = Run {
        seed: config.seed,
        threads: thread_count(cli.deterministic)?,
        config,
    };
    let mut out = Artifacts::new(&cli.out_dir);
    let mut code = ExitCode::SUCCESS;

    match &cli.command {
        Command::Oracle { states, state, .. } => {
            let list = match (states, state) {
                (Some(s), _) => s.clone(),
                (None, Some(s)) => vec![s.clone()],
                (None, None) => run.config.oracle.states.clone(),
            };
            commands::oracle(&run, &list, &mut out)?;
        }
        Command::Train { .. } => {
            commands::train(&run, &mut out)?;
        }
        Command::Test { weights, set } => {
            let path = weights
                .clone()
                .unwrap_or_else(|| commands::default_weights_path(&cli.out_dir));
            let w = commands::load_weights(&path)?;
            commands::test(&run, &w, set.as_deref(), &mut out)?;
        }
        Command::Sweep { points, .. } => commands::sweep(&run, points.as_deref(), &mut out)?,
        Command::Verify { inject_fault } => {
            let fault = Fault {
                flip_dt_sign: *inject_fault == Some(FaultArg::DtSign),
            };
            if !commands::verify(&run, fault, &mut out)? {
                eprintln!("verification failed");
                code = ExitCode::from(4);
            }
        }
        Command::Baseline { .. } => commands::baseline(&run, &mut out)?,
        Command::Reproduce => commands::reproduce(&run, &mut out)?,
    }

    let manifest = RunManifest::new(
        command_name(&cli.command),
        &run.config.canonical(),
        run.seed,
        cli.deterministic,
        run.threads,
        &out,
        start.elapsed(),
    );
    manifest.write(&cli.out_dir)?;
    Ok(code)
}

/// 2 for configuration or argument problems, 3 for divergence, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    use qtemporal_core::Error as CoreError;
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::Diverged { .. } => 3,
                CoreError::Domain(_) | CoreError::PathSumTooLarge { .. } => 1,
                _ => 2,
            };
        }
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
