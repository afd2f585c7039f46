//! Classical feed-forward baseline.
//!
//! A small sigmoid network trained by full-batch backpropagation on the
//! magnitudes of the input amplitudes. It fits the training set easily but
//! has no access to phases or to the tensor structure of the state, so it
//! does not generalize to unseen entangled states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::train::{Evaluation, TrainingPair};

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    /// Widths from input to output; first must be 4 and last 1.
    pub layer_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub rms_stop: f64,
    pub seed: u64,
    /// Initial weights are uniform in `±init_scale/√fan_in`.
    pub init_scale: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            layer_sizes: vec![4, 8, 1],
            learning_rate: 2.0,
            max_epochs: 50_000,
            rms_stop: 5e-3,
            seed: 1,
            init_scale: 2.0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2
            || self.layer_sizes[0] != 4
            || *self.layer_sizes.last().expect("nonempty") != 1
            || self.layer_sizes.contains(&0)
        {
            return Err(Error::Argument(format!(
                "layer sizes must run from 4 to 1, got {:?}",
                self.layer_sizes
            )));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::Argument("learning_rate must be > 0".into()));
        }
        Ok(())
    }

    /// Same network with every hidden layer twice as wide.
    pub fn doubled_hidden(&self) -> Self {
        let n = self.layer_sizes.len();
        let layer_sizes = self
            .layer_sizes
            .iter()
            .enumerate()
            .map(|(i, &w)| if i == 0 || i == n - 1 { w } else { 2 * w })
            .collect();
        Self {
            layer_sizes,
            ..self.clone()
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// A labelled real input vector with its target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub label: String,
    pub input: [f64; 4],
    pub target: f64,
}

impl Sample {
    /// Amplitude magnitudes of a pure training pair; `None` for mixed
    /// states, which have no ket to feed in.
    pub fn from_pair(pair: &TrainingPair) -> Option<Self> {
        let psi = pair.state.as_pure(1e-10)?;
        Some(Self {
            label: pair.label.clone(),
            input: psi.magnitudes(),
            target: pair.target,
        })
    }
}

/// Converts the pure pairs of a dataset, skipping mixed ones.
pub fn samples(data: &[TrainingPair]) -> Vec<Sample> {
    data.iter().filter_map(Sample::from_pair).collect()
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    /// `out × in`, row-major.
    weights: Vec<f64>,
    biases: Vec<f64>,
    inputs: usize,
}

impl Layer {
    fn outputs(&self) -> usize {
        self.biases.len()
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs())
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                sigmoid(self.biases[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            })
            .collect()
    }
}

/// Feed-forward network with sigmoid units on every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

impl Mlp {
    pub fn new(cfg: &MlpConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let layers = cfg
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (inputs, outputs) = (w[0], w[1]);
                let bound = cfg.init_scale / (inputs as f64).sqrt();
                Layer {
                    weights: (0..inputs * outputs)
                        .map(|_| rng.gen_range(-bound..bound))
                        .collect(),
                    biases: (0..outputs).map(|_| rng.gen_range(-bound..bound)).collect(),
                    inputs,
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn predict(&self, x: &[f64; 4]) -> f64 {
        let mut a = x.to_vec();
        for layer in &self.layers {
            a = layer.forward(&a);
        }
        a[0]
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Weights then biases, layer by layer.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.param_count());
        let mut it = p.iter();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = *it.next().expect("length checked");
            }
        }
    }

    /// Mean squared error over `data`.
    pub fn loss(&self, data: &[Sample]) -> f64 {
        data.iter()
            .map(|s| (self.predict(&s.input) - s.target).powi(2))
            .sum::<f64>()
            / data.len() as f64
    }

    /// Mean squared error and its gradient by backpropagation, in
    /// [`Mlp::params`] order.
    pub fn loss_and_gradient(&self, data: &[Sample]) -> (f64, Vec<f64>) {
        let mut grads: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| Layer {
                weights: vec![0.0; l.weights.len()],
                biases: vec![0.0; l.biases.len()],
                inputs: l.inputs,
            })
            .collect();
        let scale = 1.0 / data.len() as f64;
        let mut loss = 0.0;
        for s in data {
            let mut acts = vec![s.input.to_vec()];
            for layer in &self.layers {
                let next = layer.forward(acts.last().expect("nonempty"));
                acts.push(next);
            }
            let err = acts.last().expect("nonempty")[0] - s.target;
            loss += scale * err * err;
            // δ at the output pre-activation.
            let y = acts.last().expect("nonempty")[0];
            let mut delta = vec![scale * 2.0 * err * y * (1.0 - y)];
            for (k, layer) in self.layers.iter().enumerate().rev() {
                let input = &acts[k];
                let g = &mut grads[k];
                for (o, d) in delta.iter().enumerate() {
                    g.biases[o] += d;
                    for (i, x) in input.iter().enumerate() {
                        g.weights[o * layer.inputs + i] += d * x;
                    }
                }
                if k > 0 {
                    delta = (0..layer.inputs)
                        .map(|i| {
                            let back: f64 = delta
                                .iter()
                                .enumerate()
                                .map(|(o, d)| d * layer.weights[o * layer.inputs + i])
                                .sum();
                            back * input[i] * (1.0 - input[i])
                        })
                        .collect();
                }
            }
        }
        let flat = grads
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect();
        (loss, flat)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpReport {
    pub net: Mlp,
    pub rms_history: Vec<f64>,
    pub final_rms: f64,
    pub converged: bool,
}

/// Full-batch gradient descent with backpropagated gradients.
pub fn mlp_train(data: &[Sample], cfg: &MlpConfig) -> Result<MlpReport> {
    if data.is_empty() {
        return Err(Error::Argument("training set is empty".into()));
    }
    let mut net = Mlp::new(cfg)?;
    let mut params = net.params();
    let mut history = Vec::new();
    let mut initial = None;
    let mut converged = false;
    for epoch in 0..cfg.max_epochs {
        let (loss, grad) = net.loss_and_gradient(data);
        let rms = loss.sqrt();
        history.push(rms);
        let init = *initial.get_or_insert(rms);
        if rms <= cfg.rms_stop {
            converged = true;
            break;
        }
        if !rms.is_finite() || rms > 10.0 * init {
            return Err(Error::Diverged {
                epoch,
                rms,
                initial: init,
            });
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= cfg.learning_rate * g;
        }
        net.set_params(&params);
    }
    let final_rms = net.loss(data).sqrt();
    Ok(MlpReport {
        net,
        rms_history: history,
        final_rms,
        converged: converged || final_rms <= cfg.rms_stop,
    })
}

pub fn mlp_eval(net: &Mlp, data: &[Sample]) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::Argument("evaluation set is empty".into()));
    }
    let outputs: Vec<f64> = data.iter().map(|s| net.predict(&s.input)).collect();
    let mse = outputs
        .iter()
        .zip(data)
        .map(|(o, s)| (o - s.target).powi(2))
        .sum::<f64>()
        / data.len() as f64;
    Ok(Evaluation {
        outputs,
        rms: mse.sqrt(),
    })
}

/// Result of training on all samples but one and testing on that one.
#[derive(Debug, Clone, PartialEq)]
pub struct LooFold {
    pub held_out: String,
    pub target: f64,
    pub output: f64,
    pub abs_error: f64,
    pub train_rms: f64,
    /// Training reached `rms ≤ 1e-2` on the remaining samples.
    pub trained: bool,
    pub error: Option<String>,
}

/// Training RMS a fold must reach to count as fitted.
pub const LOO_FIT_RMS: f64 = 1e-2;

/// Leave-one-out: each sample in turn is held out, the network is trained
/// on the rest and scored on the held-out sample. A fold that fails to
/// train is flagged, not fatal.
pub fn loo_experiment(pool: &[Sample], cfg: &MlpConfig) -> Result<Vec<LooFold>> {
    if pool.len() < 2 {
        return Err(Error::Argument(
            "leave-one-out needs at least 2 samples".into(),
        ));
    }
    cfg.validate()?;
    let fold = |k: usize| {
        let held = &pool[k];
        let rest: Vec<Sample> = pool
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, s)| s.clone())
            .collect();
        match mlp_train(&rest, cfg) {
            Ok(r) => {
                let output = r.net.predict(&held.input);
                LooFold {
                    held_out: held.label.clone(),
                    target: held.target,
                    output,
                    abs_error: (output - held.target).abs(),
                    train_rms: r.final_rms,
                    trained: r.final_rms <= LOO_FIT_RMS,
                    error: None,
                }
            }
            Err(e) => LooFold {
                held_out: held.label.clone(),
                target: held.target,
                output: f64::NAN,
                abs_error: f64::NAN,
                train_rms: f64::NAN,
                trained: false,
                error: Some(e.to_string()),
            },
        }
    };
    // Folds are independent; each gets its own thread and results are
    // collected in pool order.
    let fold = &fold;
    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = (0..pool.len())
            .map(|k| scope.spawn(move || fold(k)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fold thread panicked"))
            .collect()
    }))
}

/// The eight pure states of the training and test tables with their targets.
pub fn default_pool() -> Vec<Sample> {
    let mut data = crate::train::table2_dataset(crate::train::P_TARGET);
    data.extend(crate::train::table3_dataset(crate::train::P_TARGET));
    samples(&data)
}
