//! The quantum temporal network: forward pass, loss and gradients with
//! respect to the per-slice physical parameters.
//!
//! The network's output for an input state `ρ0` is `⟨σzA σzB⟩²` measured
//! after evolving `ρ0` under the weight schedule.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{self, Schedule, SliceParams};
use crate::linalg::{self, c, HermitianEigen, Mat4, C64};
use crate::qstate::DensityMatrix;
use crate::train::TrainingPair;

/// Which physical parameter of a slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKind {
    K,
    Eps,
    J,
}

impl ParamKind {
    pub const ALL: [ParamKind; 3] = [ParamKind::K, ParamKind::Eps, ParamKind::J];

    pub fn label(&self) -> &'static str {
        match self {
            ParamKind::K => "K",
            ParamKind::Eps => "eps",
            ParamKind::J => "J",
        }
    }

    /// `∂H/∂θ` for this parameter.
    pub fn generator(&self) -> Mat4 {
        match self {
            ParamKind::K => linalg::sum_x(),
            ParamKind::Eps => linalg::sum_z(),
            ParamKind::J => linalg::zz(),
        }
    }

    fn get(&self, p: &SliceParams) -> f64 {
        match self {
            ParamKind::K => p.k,
            ParamKind::Eps => p.eps,
            ParamKind::J => p.j,
        }
    }

    fn get_mut<'a>(&self, p: &'a mut SliceParams) -> &'a mut f64 {
        match self {
            ParamKind::K => &mut p.k,
            ParamKind::Eps => &mut p.eps,
            ParamKind::J => &mut p.j,
        }
    }
}

/// Location of one scalar parameter: slice index and kind. The flat index
/// is `3·slice + kind` with kinds ordered `K, eps, J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId {
    pub slice: usize,
    pub kind: ParamKind,
}

impl ParamId {
    pub fn from_flat(i: usize) -> Self {
        Self {
            slice: i / 3,
            kind: ParamKind::ALL[i % 3],
        }
    }

    pub fn flat(&self) -> usize {
        3 * self.slice + self.kind as usize
    }
}

impl std::fmt::Display for ParamId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}[{}]", self.kind.label(), self.slice)
    }
}

/// Tunneling amplitude of the closed-form solution: four slices of 2.5 ħ/meV
/// rotate both spins by `3π/2` about x, turning the `σz⊗σz` readout into
/// `σy⊗σy`.
pub const ANALYTIC_K: f64 = 3.0 * PI / 40.0;
pub const DEFAULT_SLICES: usize = 4;
pub const DEFAULT_DT: f64 = 2.5;

/// A schedule plus the mask of parameters that training may move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkWeights {
    pub schedule: Schedule,
    /// One flag per scalar parameter in flat order (`K, eps, J` per slice).
    pub mask: Vec<bool>,
}

/// Serialized layout: `dt`, `mask`, then `[[slices]]` tables.
#[derive(Serialize, Deserialize)]
struct WeightsFile {
    dt: f64,
    mask: Vec<bool>,
    slices: Vec<SliceParams>,
}

impl NetworkWeights {
    pub fn new(schedule: Schedule, mask: Vec<bool>) -> Result<Self> {
        schedule.validate()?;
        if mask.len() != 3 * schedule.len() {
            return Err(Error::Argument(format!(
                "mask has {} entries, expected {}",
                mask.len(),
                3 * schedule.len()
            )));
        }
        Ok(Self { schedule, mask })
    }

    /// Trains every `K_s` and `eps_s`; `J_s` stays fixed.
    pub fn default_mask(slices: usize) -> Vec<bool> {
        Self::mask_for(slices, &[ParamKind::K, ParamKind::Eps])
    }

    pub fn mask_for(slices: usize, kinds: &[ParamKind]) -> Vec<bool> {
        (0..3 * slices)
            .map(|i| kinds.contains(&ParamId::from_flat(i).kind))
            .collect()
    }

    pub fn with_default_mask(schedule: Schedule) -> Result<Self> {
        let mask = Self::default_mask(schedule.len());
        Self::new(schedule, mask)
    }

    /// All parameters zero: identity evolution.
    pub fn zero(slices: usize, dt: f64) -> Result<Self> {
        Self::with_default_mask(Schedule::uniform(dt, slices, SliceParams::default())?)
    }

    /// Uniform `K = 3π/40` meV over four slices of 2.5 ħ/meV, no field.
    pub fn analytic() -> Self {
        Self::with_default_mask(
            Schedule::uniform(
                DEFAULT_DT,
                DEFAULT_SLICES,
                SliceParams::tunneling(ANALYTIC_K),
            )
            .expect("valid"),
        )
        .expect("valid")
    }

    pub fn param_count(&self) -> usize {
        self.mask.len()
    }

    pub fn get(&self, id: ParamId) -> f64 {
        id.kind.get(&self.schedule.slices[id.slice])
    }

    pub fn set(&mut self, id: ParamId, value: f64) {
        *id.kind.get_mut(&mut self.schedule.slices[id.slice]) = value;
    }

    pub fn trainable(&self) -> Vec<ParamId> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| ParamId::from_flat(i))
            .collect()
    }

    pub fn trainable_values(&self) -> Vec<f64> {
        self.trainable()
            .into_iter()
            .map(|id| self.get(id))
            .collect()
    }

    /// Subtracts `step · g` from the trainable parameters.
    pub fn step(&mut self, g: &GradientVector, step: f64) {
        for (id, gi) in self.trainable().into_iter().zip(&g.0) {
            let v = self.get(id) - step * gi;
            self.set(id, v);
        }
    }

    pub fn to_toml(&self) -> String {
        let file = WeightsFile {
            dt: self.schedule.dt,
            mask: self.mask.clone(),
            slices: self.schedule.slices.clone(),
        };
        toml::to_string(&file).expect("weights serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: WeightsFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(Schedule::new(file.dt, file.slices)?, file.mask)
    }
}

/// One real per trainable parameter, in [`NetworkWeights::trainable`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector(pub Vec<f64>);

impl GradientVector {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// `max_i |a_i − b_i| / max(1, ‖a‖)`
    pub fn relative_distance(&self, other: &GradientVector) -> f64 {
        let diff = self
            .0
            .iter()
            .zip(&other.0)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        diff / self.norm().max(1.0)
    }
}

/// `⟨σzA σzB⟩` after evolution.
pub fn correlation(rho: &DensityMatrix, w: &NetworkWeights) -> f64 {
    evolve::evolve_density(rho, &w.schedule).zz_correlation()
}

/// The network output `⟨σzA σzB⟩²`, in `[0, 1]`.
pub fn forward(rho: &DensityMatrix, w: &NetworkWeights) -> f64 {
    let corr = correlation(rho, w);
    (corr * corr).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub mse: f64,
    pub rms: f64,
}

/// Mean squared error of the network outputs against the targets.
pub fn loss(w: &NetworkWeights, data: &[TrainingPair]) -> Result<LossReport> {
    if data.is_empty() {
        return Err(Error::Argument("dataset is empty".into()));
    }
    let sum: f64 = data
        .iter()
        .map(|p| {
            let e = forward(&p.state, w) - p.target;
            e * e
        })
        .sum();
    let mse = sum / data.len() as f64;
    Ok(LossReport {
        mse,
        rms: mse.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientMethod {
    /// Exact derivative of each slice exponential from its eigendecomposition.
    Analytic,
    /// `(L(θ+h) − L(θ−h)) / 2h` per parameter.
    CentralDifference { h: f64 },
}

/// Gradient of the mean squared error with respect to the trainable
/// parameters.
pub fn gradient(
    w: &NetworkWeights,
    data: &[TrainingPair],
    method: GradientMethod,
) -> Result<GradientVector> {
    if data.is_empty() {
        return Err(Error::Argument("dataset is empty".into()));
    }
    match method {
        GradientMethod::Analytic => Ok(analytic_gradient(w, data)),
        GradientMethod::CentralDifference { h } => {
            if h.is_nan() || h <= 0.0 {
                return Err(Error::Argument(format!(
                    "difference step must be > 0, got {h}"
                )));
            }
            central_difference(w, data, h)
        }
    }
}

fn central_difference(w: &NetworkWeights, data: &[TrainingPair], h: f64) -> Result<GradientVector> {
    let mut probe = w.clone();
    let mut g = Vec::new();
    for id in w.trainable() {
        let v = w.get(id);
        probe.set(id, v + h);
        let up = loss(&probe, data)?.mse;
        probe.set(id, v - h);
        let down = loss(&probe, data)?.mse;
        probe.set(id, v);
        g.push((up - down) / (2.0 * h));
    }
    Ok(GradientVector(g))
}

/// Per-slice data for differentiating `exp(−iH dt)`.
struct SliceDerivative {
    unitary: Mat4,
    eig: HermitianEigen,
    /// Divided differences of `λ ↦ e^{−iλdt}` on pairs of eigenvalues.
    kernel: [[C64; 4]; 4],
}

impl SliceDerivative {
    fn new(p: &SliceParams, dt: f64) -> Self {
        let eig = HermitianEigen::new(&evolve::slice_hamiltonian(p));
        let unitary = eig.apply(|l| C64::from_polar(1.0, -l * dt));
        let mut kernel = [[C64::new(0.0, 0.0); 4]; 4];
        for (j, row) in kernel.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                // (e^{−iλj t} − e^{−iλk t})/(λj − λk) = −i t e^{−i t m} sinc(t δ)
                // with m the mean and δ half the difference; the sinc form is
                // stable for (near-)degenerate pairs.
                let (lj, lk) = (eig.values[j], eig.values[k]);
                let m = 0.5 * (lj + lk);
                let x = 0.5 * (lj - lk) * dt;
                let sinc = if x.abs() < 1e-8 {
                    1.0 - x * x / 6.0
                } else {
                    x.sin() / x
                };
                *entry = c(0.0, -dt) * C64::from_polar(1.0, -m * dt) * sinc;
            }
        }
        Self {
            unitary,
            eig,
            kernel,
        }
    }

    /// `∂U/∂θ` for a parameter with generator `P`.
    fn derivative(&self, generator: &Mat4) -> Mat4 {
        let v = &self.eig.vectors;
        let mut inner = v.adjoint() * generator * v;
        for j in 0..4 {
            for k in 0..4 {
                inner[(j, k)] *= self.kernel[j][k];
            }
        }
        v * inner * v.adjoint()
    }
}

fn analytic_gradient(w: &NetworkWeights, data: &[TrainingPair]) -> GradientVector {
    let s = &w.schedule;
    let n = s.len();
    let slices: Vec<SliceDerivative> = s
        .slices
        .iter()
        .map(|p| SliceDerivative::new(p, s.dt))
        .collect();

    // prefix[k] = U_{k-1}···U_0, suffix[k] = U_{n-1}···U_{k+1}
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(Mat4::identity());
    for sd in &slices {
        let next = sd.unitary * prefix.last().expect("nonempty");
        prefix.push(next);
    }
    let mut suffix = vec![Mat4::identity(); n];
    for k in (0..n.saturating_sub(1)).rev() {
        suffix[k] = suffix[k + 1] * slices[k + 1].unitary;
    }
    let g = prefix[n];
    let zz = linalg::zz();

    let trainable = w.trainable();
    let derivatives: Vec<Mat4> = trainable
        .iter()
        .map(|id| slices[id.slice].derivative(&id.kind.generator()))
        .collect();

    let scale = 1.0 / data.len() as f64;
    let mut grad = vec![0.0; trainable.len()];
    for pair in data {
        let rho = pair.state.matrix();
        let rho_gd = rho * g.adjoint() * zz;
        let corr = (zz * g * rho * g.adjoint()).trace().re;
        let out = corr * corr;
        let outer = scale * 2.0 * (out - pair.target) * 2.0 * corr;
        for (slot, (id, du)) in grad.iter_mut().zip(trainable.iter().zip(&derivatives)) {
            let a = prefix[id.slice] * rho_gd * suffix[id.slice];
            // Tr[dU · A]
            let mut tr = C64::new(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    tr += du[(i, j)] * a[(j, i)];
                }
            }
            *slot += outer * 2.0 * tr.re;
        }
    }
    GradientVector(grad)
}
