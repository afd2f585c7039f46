//! Time evolution of the two-qubit register under the sliced Hamiltonian
//!
//! `H_s = K_s(σx⊗I + I⊗σx) + eps_s(σz⊗I + I⊗σz) + J_s(σz⊗σz)`
//!
//! with `ħ = 1`, energies in meV and times in ħ/meV. Each slice is
//! exponentiated exactly through a Hermitian eigendecomposition; the
//! path-sum engine works with the split short-time propagator instead and is
//! checked against the matching split matrix product.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, Mat2, Mat4, C64, ONE};
use crate::qstate::DensityMatrix;

/// Physical parameters of one time slice, all in meV.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SliceParams {
    /// Tunneling amplitude.
    #[serde(rename = "K")]
    pub k: f64,
    /// Applied field.
    pub eps: f64,
    /// `σz⊗σz` coupling.
    #[serde(rename = "J", default)]
    pub j: f64,
}

impl SliceParams {
    pub fn new(k: f64, eps: f64, j: f64) -> Self {
        Self { k, eps, j }
    }

    pub fn tunneling(k: f64) -> Self {
        Self {
            k,
            eps: 0.0,
            j: 0.0,
        }
    }

    fn is_finite(&self) -> bool {
        self.k.is_finite() && self.eps.is_finite() && self.j.is_finite()
    }
}

/// Ordered slices of equal duration `dt`; slice 0 acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub dt: f64,
    pub slices: Vec<SliceParams>,
}

impl Schedule {
    pub fn new(dt: f64, slices: Vec<SliceParams>) -> Result<Self> {
        let s = Self { dt, slices };
        s.validate()?;
        Ok(s)
    }

    /// `count` identical slices.
    pub fn uniform(dt: f64, count: usize, params: SliceParams) -> Result<Self> {
        Self::new(dt, vec![params; count])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if self.slices.is_empty() {
            return Err(Error::InvalidSchedule(
                "at least one slice is required".into(),
            ));
        }
        if let Some(i) = self.slices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "slice {i} has a non-finite parameter"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.slices.len() as f64
    }

    /// Net rotation angle `Σ_s 2·K_s·dt` of the tunneling terms.
    pub fn tunneling_angle(&self) -> f64 {
        self.slices.iter().map(|p| 2.0 * p.k * self.dt).sum()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("schedule serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }
}

pub fn slice_hamiltonian(p: &SliceParams) -> Mat4 {
    linalg::sum_x() * c(p.k, 0.0) + linalg::sum_z() * c(p.eps, 0.0) + linalg::zz() * c(p.j, 0.0)
}

/// `exp(−i·H·dt)` for one slice.
pub fn slice_unitary(p: &SliceParams, dt: f64) -> Mat4 {
    linalg::expm_hermitian(&slice_hamiltonian(p), dt)
}

/// `U_n ··· U_2 · U_1`, the full-interval Green's function.
pub fn propagator(s: &Schedule) -> Mat4 {
    s.slices
        .iter()
        .fold(Mat4::identity(), |acc, p| slice_unitary(p, s.dt) * acc)
}

/// `G ρ G†`
pub fn evolve_density(rho: &DensityMatrix, s: &Schedule) -> DensityMatrix {
    rho.conjugate_by(&propagator(s))
}

/// Computational basis label of both spins; bit 0 is spin up (`σz = +1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinPair {
    pub a: u8,
    pub b: u8,
}

impl SpinPair {
    pub const ALL: [SpinPair; 4] = [
        SpinPair { a: 0, b: 0 },
        SpinPair { a: 0, b: 1 },
        SpinPair { a: 1, b: 0 },
        SpinPair { a: 1, b: 1 },
    ];

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn index(&self) -> usize {
        (2 * self.a + self.b) as usize
    }

    fn sz(bit: u8) -> f64 {
        if bit == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Factors of the split short-time propagator of one slice:
/// `exp(−i(eps·Σσz + J·σzσz)dt) · exp(−iK·Σσx·dt)`.
#[derive(Debug, Clone, Copy)]
struct SplitSlice {
    /// Single-qubit tunneling propagator `exp(−iK dt σx)`, shared by A and B.
    hop: Mat2,
    /// Diagonal phase per final basis state.
    phase: [C64; 4],
}

impl SplitSlice {
    fn new(p: &SliceParams, dt: f64) -> Self {
        let hop = linalg::expm_su2(p.k, 0.0, 0.0, dt);
        let phase = SpinPair::ALL.map(|s| {
            let (za, zb) = (SpinPair::sz(s.a), SpinPair::sz(s.b));
            let energy = p.eps * (za + zb) + p.j * za * zb;
            C64::from_polar(1.0, -energy * dt)
        });
        Self { hop, phase }
    }

    /// `⟨to|U_split|from⟩`
    fn element(&self, to: SpinPair, from: SpinPair) -> C64 {
        self.phase[to.index()]
            * self.hop[(to.a as usize, from.a as usize)]
            * self.hop[(to.b as usize, from.b as usize)]
    }

    fn matrix(&self) -> Mat4 {
        Mat4::from_fn(|r, col| self.element(SpinPair::from_index(r), SpinPair::from_index(col)))
    }
}

/// Split short-time propagator of one slice as a 4×4 matrix.
pub fn split_slice_unitary(p: &SliceParams, dt: f64) -> Mat4 {
    SplitSlice::new(p, dt).matrix()
}

/// Ordered product of split slice propagators.
pub fn split_propagator(s: &Schedule) -> Mat4 {
    s.slices.iter().fold(Mat4::identity(), |acc, p| {
        split_slice_unitary(p, s.dt) * acc
    })
}

/// Default cap on slices for explicit path enumeration (`4^(n−1)` paths).
pub const DEFAULT_PATH_SUM_CAP: usize = 12;

/// Explicit sum over spin paths of the discretized propagator.
#[derive(Debug, Clone, Copy)]
pub struct PathSum {
    pub max_slices: usize,
}

impl Default for PathSum {
    fn default() -> Self {
        Self {
            max_slices: DEFAULT_PATH_SUM_CAP,
        }
    }
}

impl PathSum {
    pub fn with_cap(max_slices: usize) -> Self {
        Self { max_slices }
    }

    /// `⟨fin|U_split,n ··· U_split,1|init⟩` as a sum over the spin
    /// configurations at the `n − 1` interior time boundaries. The endpoints
    /// are fixed labels. Paths are visited in configuration-index order, so the
    /// result is bit-stable.
    pub fn amplitude(&self, init: SpinPair, fin: SpinPair, s: &Schedule) -> Result<C64> {
        s.validate()?;
        let n = s.len();
        if n > self.max_slices {
            return Err(Error::PathSumTooLarge {
                slices: n,
                cap: self.max_slices,
            });
        }
        let slices: Vec<SplitSlice> = s.slices.iter().map(|p| SplitSlice::new(p, s.dt)).collect();
        let interior = n - 1;
        let count = 1usize << (2 * interior);
        let mut total = C64::new(0.0, 0.0);
        let mut path = vec![init; n + 1];
        path[n] = fin;
        for config in 0..count {
            for (j, label) in path[1..n].iter_mut().enumerate() {
                *label = SpinPair::from_index((config >> (2 * j)) & 3);
            }
            let mut weight = ONE;
            for (k, slice) in slices.iter().enumerate() {
                weight *= slice.element(path[k + 1], path[k]);
            }
            total += weight;
        }
        Ok(total)
    }

    /// All sixteen amplitudes, `[fin][init]`.
    pub fn matrix(&self, s: &Schedule) -> Result<Mat4> {
        let mut m = Mat4::zeros();
        for fin in SpinPair::ALL {
            for init in SpinPair::ALL {
                m[(fin.index(), init.index())] = self.amplitude(init, fin, s)?;
            }
        }
        Ok(m)
    }
}

pub fn path_sum_amplitude(init: SpinPair, fin: SpinPair, s: &Schedule) -> Result<C64> {
    PathSum::default().amplitude(init, fin, s)
}

/// Ising bond `−½·ln(tan(K·dt))` between neighbouring time slices of one
/// spin. Reported as a diagnostic; the path sum uses the raw propagator.
pub fn ising_bond_strength(k: f64, dt: f64) -> Result<f64> {
    let x = k * dt;
    if !(x > 0.0 && x < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("K·dt = {x} is outside (0, π/2)")));
    }
    Ok(-0.5 * x.tan().ln())
}

/// Largest entry of `U_split(dt) − U_exact(dt)` for a single slice.
pub fn split_error(p: &SliceParams, dt: f64) -> f64 {
    linalg::max_abs(&(split_slice_unitary(p, dt) - slice_unitary(p, dt)))
}

/// Ratio of single-slice split errors at `dt` and `dt/2`; approaches 4 for
/// a second-order local error.
pub fn split_halving_ratio(p: &SliceParams, dt: f64) -> f64 {
    split_error(p, dt) / split_error(p, 0.5 * dt)
}

/// Same ratio for a whole schedule whose slices are each refined into two
/// halves, with the total time held fixed; approaches 2 (first-order
/// global error).
pub fn schedule_halving_ratio(s: &Schedule) -> f64 {
    let exact = propagator(s);
    let coarse = linalg::max_abs(&(split_propagator(s) - exact));
    let refined = Schedule {
        dt: 0.5 * s.dt,
        slices: s.slices.iter().flat_map(|&p| [p, p]).collect(),
    };
    let fine = linalg::max_abs(&(split_propagator(&refined) - exact));
    coarse / fine
}
