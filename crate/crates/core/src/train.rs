//! Full-batch gradient descent on the network weights, the canonical
//! training and test sets, evaluation and the target sweep for the
//! partially entangled state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qnn::{self, GradientMethod, NetworkWeights, ParamKind};
use crate::qstate::{CatalogState, DensityMatrix, StateParams};

/// An input state with the entanglement value the network should output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub label: String,
    pub state: DensityMatrix,
    pub target: f64,
}

impl TrainingPair {
    pub fn new(label: impl Into<String>, state: DensityMatrix, target: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&target) {
            return Err(Error::Argument(format!(
                "target {target} is outside [0, 1]"
            )));
        }
        Ok(Self {
            label: label.into(),
            state,
            target,
        })
    }

    pub fn catalog(state: CatalogState, target: f64) -> Result<Self> {
        Self::new(state.name(), state.density(), target)
    }
}

/// Target printed for the partially entangled state.
pub const P_TARGET: f64 = 0.44;
/// The value the closed-form solution attains for it.
pub const P_TARGET_EXACT: f64 = 4.0 / 9.0;

/// Bell, flat, C(γ = 0.5) and P with the given target for P.
pub fn table2_dataset(p_target: f64) -> Vec<TrainingPair> {
    vec![
        TrainingPair::catalog(CatalogState::Bell { delta: 0.0 }, 1.0),
        TrainingPair::catalog(CatalogState::Flat, 0.0),
        TrainingPair::catalog(CatalogState::Correlated { gamma: 0.5 }, 0.0),
        TrainingPair::catalog(CatalogState::Partial, p_target),
    ]
    .into_iter()
    .collect::<Result<_>>()
    .expect("targets in range")
}

/// EPR, |00⟩, (|10⟩ + 0.9|11⟩)/√1.81, P2 and the mixed state M.
pub fn table3_dataset(p2_target: f64) -> Vec<TrainingPair> {
    vec![
        TrainingPair::catalog(CatalogState::Epr, 1.0),
        TrainingPair::catalog(CatalogState::Ket00, 0.0),
        TrainingPair::catalog(CatalogState::Ket10Ket11, 0.0),
        TrainingPair::catalog(CatalogState::Partial2, p2_target),
        TrainingPair::catalog(CatalogState::Mixed, 0.0),
    ]
    .into_iter()
    .collect::<Result<_>>()
    .expect("targets in range")
}

/// Looks up a named dataset: `table2`, `table2-exact`, `table3`,
/// `table3-exact`.
pub fn named_dataset(name: &str) -> Result<Vec<TrainingPair>> {
    match name {
        "table2" => Ok(table2_dataset(P_TARGET)),
        "table2-exact" => Ok(table2_dataset(P_TARGET_EXACT)),
        "table3" => Ok(table3_dataset(P_TARGET)),
        "table3-exact" => Ok(table3_dataset(P_TARGET_EXACT)),
        other => Err(Error::Argument(format!("unknown dataset `{other}`"))),
    }
}

pub fn catalog_pair(name: &str, params: StateParams, target: f64) -> Result<TrainingPair> {
    TrainingPair::catalog(CatalogState::parse(name, params)?, target)
}

/// Starting weights for training.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Every parameter zero (identity evolution).
    Zero,
    /// Uniform tunneling `K_s = k` on every slice, everything else zero.
    Tunneling(f64),
    /// The closed-form solution [`NetworkWeights::analytic`].
    Analytic,
    /// Trainable parameters drawn uniformly from `[low, high]` with the run seed.
    Random {
        low: f64,
        high: f64,
    },
    Explicit(NetworkWeights),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub rms_stop: f64,
    pub init: Init,
    pub seed: u64,
    pub slices: usize,
    pub dt: f64,
    /// Parameter kinds that train on every slice. Ignored for
    /// [`Init::Explicit`], which carries its own mask.
    pub trainable: Vec<ParamKind>,
    pub method: GradientMethod,
}

/// Default starting tunneling amplitude in meV.
pub const DEFAULT_INIT_K: f64 = 0.2;

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.02,
            max_epochs: 5000,
            rms_stop: 1e-4,
            init: Init::Tunneling(DEFAULT_INIT_K),
            seed: 0,
            slices: qnn::DEFAULT_SLICES,
            dt: qnn::DEFAULT_DT,
            trainable: vec![ParamKind::K, ParamKind::Eps, ParamKind::J],
            method: GradientMethod::Analytic,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Argument("learning_rate must be > 0".into()));
        }
        if self.rms_stop.is_nan() || self.rms_stop < 0.0 {
            return Err(Error::Argument("rms_stop must be >= 0".into()));
        }
        if self.slices == 0 {
            return Err(Error::Argument("slices must be >= 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Argument("dt must be > 0".into()));
        }
        if let Init::Random { low, high } = self.init {
            if low.is_nan() || high.is_nan() || low > high {
                return Err(Error::Argument("random init box needs low <= high".into()));
            }
        }
        Ok(())
    }

    /// Builds the starting weights.
    pub fn initial_weights(&self) -> Result<NetworkWeights> {
        self.validate()?;
        let mask = NetworkWeights::mask_for(self.slices, &self.trainable);
        let mut w = NetworkWeights::zero(self.slices, self.dt)?;
        w.mask = mask;
        match &self.init {
            Init::Zero => {}
            Init::Tunneling(k) => {
                for p in &mut w.schedule.slices {
                    p.k = *k;
                }
            }
            Init::Analytic => {
                let a = NetworkWeights::analytic();
                if a.schedule.len() != self.slices || a.schedule.dt != self.dt {
                    return Err(Error::Argument(
                        "analytic init needs 4 slices of dt = 2.5".into(),
                    ));
                }
                w.schedule = a.schedule;
            }
            Init::Random { low, high } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                for id in w.trainable() {
                    let v = if low == high {
                        *low
                    } else {
                        rng.gen_range(*low..*high)
                    };
                    w.set(id, v);
                }
            }
            Init::Explicit(explicit) => {
                explicit.schedule.validate()?;
                w = explicit.clone();
            }
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainStatus {
    /// RMS reached `rms_stop`.
    Converged,
    /// Ran out of epochs.
    MaxEpochs,
    /// Zero gradient or no step size reduced the loss.
    Stalled,
}

impl TrainStatus {
    pub fn label(&self) -> &'static str {
        match self {
            TrainStatus::Converged => "converged",
            TrainStatus::MaxEpochs => "max_epochs",
            TrainStatus::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// RMS at the start of each epoch.
    pub rms_history: Vec<f64>,
    pub initial_weights: NetworkWeights,
    pub final_weights: NetworkWeights,
    pub initial_outputs: Vec<f64>,
    pub per_pair_outputs: Vec<f64>,
    pub final_rms: f64,
    pub epochs_run: usize,
    pub converged: bool,
    pub status: TrainStatus,
    pub final_learning_rate: f64,
}

/// Halvings tried per epoch before declaring the descent stalled.
const MAX_HALVINGS: usize = 60;

/// Full-batch gradient descent with step halving whenever a step would
/// increase the loss.
pub fn train(data: &[TrainingPair], cfg: &TrainConfig) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::Argument("training set is empty".into()));
    }
    let mut w = cfg.initial_weights()?;
    let initial_weights = w.clone();
    let initial_outputs = evaluate(&w, data)?.outputs;
    let mut current = qnn::loss(&w, data)?;
    let initial_rms = current.rms;
    let mut lr = cfg.learning_rate;
    let mut history = Vec::new();
    let mut status = TrainStatus::MaxEpochs;

    for epoch in 0..cfg.max_epochs {
        history.push(current.rms);
        if current.rms <= cfg.rms_stop {
            status = TrainStatus::Converged;
            break;
        }
        if current.rms > 10.0 * initial_rms {
            return Err(Error::Diverged {
                epoch,
                rms: current.rms,
                initial: initial_rms,
            });
        }
        let g = qnn::gradient(&w, data, cfg.method)?;
        if g.max_abs() == 0.0 {
            status = TrainStatus::Stalled;
            break;
        }
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let mut trial = w.clone();
            trial.step(&g, lr);
            let trial_loss = qnn::loss(&trial, data)?;
            if trial_loss.mse <= current.mse {
                w = trial;
                current = trial_loss;
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if !accepted {
            status = TrainStatus::Stalled;
            break;
        }
    }
    if status == TrainStatus::MaxEpochs && current.rms <= cfg.rms_stop {
        status = TrainStatus::Converged;
    }

    let eval = evaluate(&w, data)?;
    Ok(TrainReport {
        epochs_run: history.len(),
        rms_history: history,
        initial_weights,
        final_weights: w,
        initial_outputs,
        per_pair_outputs: eval.outputs,
        final_rms: eval.rms,
        converged: status == TrainStatus::Converged,
        status,
        final_learning_rate: lr,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub outputs: Vec<f64>,
    pub rms: f64,
}

/// Forward pass over a dataset; the weights are only read.
pub fn evaluate(w: &NetworkWeights, data: &[TrainingPair]) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::Argument("evaluation set is empty".into()));
    }
    let outputs: Vec<f64> = data.iter().map(|p| qnn::forward(&p.state, w)).collect();
    let mse = outputs
        .iter()
        .zip(data)
        .map(|(o, p)| (o - p.target).powi(2))
        .sum::<f64>()
        / data.len() as f64;
    Ok(Evaluation {
        outputs,
        rms: mse.sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub desired: f64,
    /// Trained output for the pivot state; `NaN` when the run failed.
    pub trained: f64,
    pub rms: f64,
    pub status: String,
}

/// Retrains from `cfg.init` once per grid value, with only the pivot's
/// target replaced. Points are independent and run on up to `threads`
/// worker threads; rows come back in grid order.
pub fn sweep_target(
    pivot: &str,
    targets: &[f64],
    base_data: &[TrainingPair],
    cfg: &TrainConfig,
    threads: usize,
) -> Result<Vec<SweepRow>> {
    let index = base_data
        .iter()
        .position(|p| p.label.eq_ignore_ascii_case(pivot))
        .ok_or_else(|| Error::Argument(format!("pivot `{pivot}` is not in the dataset")))?;

    let run = |desired: f64| -> SweepRow {
        let mut data = base_data.to_vec();
        if !(0.0..=1.0).contains(&desired) {
            return SweepRow {
                desired,
                trained: f64::NAN,
                rms: f64::NAN,
                status: "error: target outside [0, 1]".into(),
            };
        }
        data[index].target = desired;
        match train(&data, cfg) {
            Ok(r) => SweepRow {
                desired,
                trained: r.per_pair_outputs[index],
                rms: r.final_rms,
                status: r.status.label().to_string(),
            },
            Err(e) => SweepRow {
                desired,
                trained: f64::NAN,
                rms: f64::NAN,
                status: format!("error: {e}"),
            },
        }
    };

    let threads = threads.max(1).min(targets.len().max(1));
    if threads == 1 {
        return Ok(targets.iter().map(|&t| run(t)).collect());
    }
    let chunk = targets.len().div_ceil(threads);
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = targets
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().map(|&t| run(t)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    Ok(rows)
}

/// `start, start + step, …` up to and including `stop` (within half a step).
pub fn grid(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(Error::Argument(format!("bad grid {start}:{step}:{stop}")));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    Ok((0..count).map(|k| start + step * k as f64).collect())
}
