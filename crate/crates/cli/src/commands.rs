//! Subcommand implementations. Each writes its artifacts through an
//! [`Artifacts`] collector; the caller writes the manifest.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qtemporal_core::baseline::{self, Sample};
use qtemporal_core::entanglement;
use qtemporal_core::qstate::{CatalogState, StateParams};
use qtemporal_core::train::{self, TrainingPair};
use qtemporal_core::verify::{self, Fault};
use qtemporal_core::NetworkWeights;

use crate::config::{config_error, Config};
use crate::output::{fixed6, real, Artifacts, Csv};

/// Everything a command needs besides its own flags.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: Config,
    pub seed: u64,
    pub threads: usize,
}

fn outputs_csv(header: &[&str], data: &[TrainingPair], columns: &[&[f64]]) -> Csv {
    let mut csv = Csv::new(header);
    for (i, pair) in data.iter().enumerate() {
        let mut row = vec![pair.label.clone()];
        row.extend(columns.iter().map(|c| real(c[i])));
        csv.row(&row);
    }
    csv
}

pub fn train(run: &Run, out: &mut Artifacts) -> Result<NetworkWeights> {
    let data = run.config.train.dataset()?;
    let cfg = run.config.train.to_train_config(run.seed)?;
    let report = train::train(&data, &cfg)?;

    let mut history = Csv::new(&["epoch", "rms"]);
    for (epoch, rms) in report.rms_history.iter().enumerate() {
        history.row(&[epoch.to_string(), real(*rms)]);
    }
    out.write("train_history.csv", history.as_str())?;

    let desired: Vec<f64> = data.iter().map(|p| p.target).collect();
    let table = outputs_csv(
        &["state", "initial", "desired", "trained"],
        &data,
        &[&report.initial_outputs, &desired, &report.per_pair_outputs],
    );
    out.write("train_outputs.csv", table.as_str())?;
    out.write("weights.toml", &report.final_weights.to_toml())?;

    print!("{}", table.as_str());
    println!(
        "status={} epochs={} rms={} tunneling_angle={}",
        report.status.label(),
        report.epochs_run,
        real(report.final_rms),
        real(report.final_weights.schedule.tunneling_angle())
    );
    Ok(report.final_weights)
}

pub fn load_weights(path: &Path) -> Result<NetworkWeights> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read weights file {}", path.display()))?;
    NetworkWeights::from_toml(&text).with_context(|| format!("in {}", path.display()))
}

/// `train` and `test` name the configured datasets; anything else is a
/// built-in dataset name.
fn dataset_by_name(config: &Config, name: &str) -> Result<Vec<TrainingPair>> {
    match name {
        "train" => config.train.dataset(),
        "test" => config.test.dataset(),
        other => train::named_dataset(other).map_err(|e| config_error(e.to_string())),
    }
}

pub fn test(
    run: &Run,
    weights: &NetworkWeights,
    set: Option<&str>,
    out: &mut Artifacts,
) -> Result<f64> {
    let data = dataset_by_name(&run.config, set.unwrap_or("test"))?;
    let eval = train::evaluate(weights, &data)?;
    let desired: Vec<f64> = data.iter().map(|p| p.target).collect();
    let mut table = outputs_csv(
        &["state", "desired", "output"],
        &data,
        &[&desired, &eval.outputs],
    );
    table.row(&["RMS".to_string(), String::new(), real(eval.rms)]);
    out.write("test_outputs.csv", table.as_str())?;
    print!("{}", table.as_str());
    Ok(eval.rms)
}

pub fn sweep(run: &Run, points: Option<&[f64]>, out: &mut Artifacts) -> Result<()> {
    let section = &run.config.sweep;
    let targets = match points {
        Some(p) => p.to_vec(),
        None => section.targets()?,
    };
    let mut cfg = run.config.train.to_train_config(run.seed)?;
    if let Some(e) = section.max_epochs {
        cfg.max_epochs = e;
    }
    if let Some(r) = section.rms_stop {
        cfg.rms_stop = r;
    }
    let data = run.config.train.dataset()?;
    let rows = train::sweep_target(&section.pivot, &targets, &data, &cfg, run.threads)
        .map_err(|e| config_error(e.to_string()))?;
    let mut csv = Csv::new(&["desired", "trained", "rms", "status"]);
    for r in &rows {
        csv.row(&[
            real(r.desired),
            real(r.trained),
            real(r.rms),
            r.status.clone(),
        ]);
    }
    out.write("sweep.csv", csv.as_str())?;
    print!("{}", csv.as_str());
    Ok(())
}

pub fn oracle(run: &Run, states: &[String], out: &mut Artifacts) -> Result<()> {
    let params = StateParams {
        gamma: run.config.oracle.gamma,
        delta: run.config.oracle.delta,
    };
    let parsed: Vec<CatalogState> = states
        .iter()
        .map(|s| CatalogState::parse(s.trim(), params).map_err(|e| config_error(e.to_string())))
        .collect::<Result<_>>()?;
    let mut csv = Csv::new(&[
        "state",
        "classical_correlation",
        "concurrence",
        "entropy_bits",
        "bures_to_product",
        "ppt",
    ]);
    for s in parsed {
        let row = entanglement::oracle_row(&s.density());
        csv.row(&[
            s.name().to_string(),
            fixed6(row.classical_correlation),
            fixed6(row.concurrence),
            row.entropy_bits.map_or_else(|| "NA".to_string(), fixed6),
            fixed6(row.bures_to_product),
            row.ppt.to_string(),
        ]);
    }
    out.write("oracle.csv", csv.as_str())?;
    print!("{}", csv.as_str());
    Ok(())
}

/// Returns whether every check passed.
pub fn verify(run: &Run, fault: Fault, out: &mut Artifacts) -> Result<bool> {
    let report = verify::run(run.seed, fault);
    let mut csv = Csv::new(&["check", "measured", "tolerance", "passed"]);
    for c in &report.checks {
        println!("{c}");
        csv.row(&[
            c.name.clone(),
            real(c.measured),
            c.bound.to_string(),
            c.passed.to_string(),
        ]);
    }
    out.write("verify.csv", csv.as_str())?;
    Ok(report.passed())
}

pub fn baseline(run: &Run, out: &mut Artifacts) -> Result<()> {
    let cfg = run.config.baseline.to_mlp_config(run.seed)?;
    let train_set = baseline::samples(&run.config.train.dataset()?);
    let test_set = baseline::samples(&run.config.test.dataset()?);
    let report = baseline::mlp_train(&train_set, &cfg)?;
    let on_train = baseline::mlp_eval(&report.net, &train_set)?;
    let on_test = baseline::mlp_eval(&report.net, &test_set)?;

    let mut eval = Csv::new(&["set", "state", "target", "output"]);
    for (name, set, e) in [
        ("train", &train_set, &on_train),
        ("test", &test_set, &on_test),
    ] {
        for (s, o) in set.iter().zip(&e.outputs) {
            eval.row(&[name.to_string(), s.label.clone(), real(s.target), real(*o)]);
        }
    }
    out.write("baseline_outputs.csv", eval.as_str())?;

    let pool: Vec<Sample> = train_set.iter().chain(&test_set).cloned().collect();
    let folds = baseline::loo_experiment(&pool, &cfg)?;
    let mut csv = Csv::new(&["held_out", "target", "output", "abs_error"]);
    for f in &folds {
        csv.row(&[
            f.held_out.clone(),
            real(f.target),
            real(f.output),
            real(f.abs_error),
        ]);
        if let Some(e) = &f.error {
            eprintln!("fold {} failed to train: {e}", f.held_out);
        } else if !f.trained {
            eprintln!(
                "fold {} stopped at training rms {}",
                f.held_out,
                real(f.train_rms)
            );
        }
    }
    out.write("baseline_folds.csv", csv.as_str())?;

    let loo_mean = folds.iter().map(|f| f.abs_error).sum::<f64>() / folds.len() as f64;
    let mut summary = Csv::new(&["metric", "value"]);
    summary.row(&["train_rms".to_string(), real(on_train.rms)]);
    summary.row(&["test_rms".to_string(), real(on_test.rms)]);
    summary.row(&["loo_mean_abs_error".to_string(), real(loo_mean)]);
    out.write("baseline_summary.csv", summary.as_str())?;
    print!("{}", summary.as_str());
    Ok(())
}

/// Train, test on the trained weights, sweep, oracle table and baseline,
/// all into one output directory.
pub fn reproduce(run: &Run, out: &mut Artifacts) -> Result<()> {
    let weights = train(run, out)?;
    test(run, &weights, None, out)?;
    sweep(run, None, out)?;
    oracle(run, &run.config.oracle.states, out)?;
    baseline(run, out)
}

pub fn default_weights_path(out_dir: &Path) -> PathBuf {
    out_dir.join("weights.toml")
}
