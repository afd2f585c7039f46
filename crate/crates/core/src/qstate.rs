//! Two-qubit states: normalized amplitude vectors, validated density
//! matrices, the named state catalog and the `σz⊗σz` correlation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{self, c, HermitianEigen, Mat4, Vec4, C64, ZERO};

/// Tolerance on Hermiticity and unit trace when validating a density matrix.
pub const DENSITY_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;

/// Amplitudes of `|00⟩, |01⟩, |10⟩, |11⟩`, unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes([C64; 4]);

impl Amplitudes {
    /// Scales `raw` to unit norm. The global phase is kept as given.
    pub fn normalize(raw: [C64; 4]) -> Result<Self> {
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState(
                "amplitudes must be finite and not all zero".into(),
            ));
        }
        Ok(Self(raw.map(|z| z / norm)))
    }

    /// Real relative amplitudes, the way states are usually written down.
    pub fn from_real(raw: [f64; 4]) -> Result<Self> {
        Self::normalize(raw.map(|x| c(x, 0.0)))
    }

    pub fn as_array(&self) -> &[C64; 4] {
        &self.0
    }

    pub fn vector(&self) -> Vec4 {
        Vec4::from_column_slice(&self.0)
    }

    /// `|a00|, |a01|, |a10|, |a11|`
    pub fn magnitudes(&self) -> [f64; 4] {
        self.0.map(|z| z.norm())
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let p = C64::from_polar(1.0, phase);
        Self(self.0.map(|z| z * p))
    }

    pub fn density(&self) -> DensityMatrix {
        density_from_pure(self)
    }
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: Mat4) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite matrix entry".into()));
        }
        let herm = linalg::hermiticity_residue(&m);
        if herm > DENSITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (residue {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr - c(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = HermitianEigen::new(&m).min();
        if min < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix produced by a trace- and positivity-preserving map of a
    /// valid state; only re-symmetrizes.
    pub(crate) fn from_trusted(m: Mat4) -> Self {
        Self((m + m.adjoint()) * c(0.5, 0.0))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.0)
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// `Tr[ρ·(σz⊗σz)]`, the classical correlation `⟨σzA σzB⟩`.
    pub fn zz_correlation(&self) -> f64 {
        zz_correlation(self)
    }

    /// Normalized eigenvector of the largest eigenvalue.
    pub fn dominant_eigenvector(&self) -> Amplitudes {
        let eig = self.eigen();
        let col = eig.vectors.column(3);
        Amplitudes::normalize([col[0], col[1], col[2], col[3]])
            .expect("eigenvectors have unit norm")
    }

    /// The pure state behind a rank-one `ρ`, or `None` when mixed.
    pub fn as_pure(&self, tol: f64) -> Option<Amplitudes> {
        if (1.0 - self.purity()).abs() <= tol {
            Some(self.dominant_eigenvector())
        } else {
            None
        }
    }

    /// `(u⊗v)ρ(u⊗v)†`
    pub fn conjugate_by(&self, u: &Mat4) -> Self {
        Self::from_trusted(u * self.0 * u.adjoint())
    }

    /// Plain-text dump: four rows, each four `re,im` pairs separated by a
    /// single space.
    pub fn to_text(&self) -> String {
        matrix_to_text(&self.0)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(matrix_from_text(text)?)
    }
}

pub fn matrix_to_text(m: &Mat4) -> String {
    let mut out = String::new();
    for r in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|col| format!("{:?},{:?}", m[(r, col)].re, m[(r, col)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn matrix_from_text(text: &str) -> Result<Mat4> {
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if rows.len() != 4 {
        return Err(Error::Parse(format!(
            "expected 4 matrix rows, found {}",
            rows.len()
        )));
    }
    let mut m = Mat4::zeros();
    for (r, line) in rows.iter().enumerate() {
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != 4 {
            return Err(Error::Parse(format!(
                "row {}: expected 4 entries, found {}",
                r + 1,
                entries.len()
            )));
        }
        for (col, entry) in entries.iter().enumerate() {
            let (re, im) = entry
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("row {}: `{entry}` is not re,im", r + 1)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: `{s}`: {e}", r + 1)))
            };
            m[(r, col)] = c(parse(re)?, parse(im)?);
        }
    }
    Ok(m)
}

/// `|ψ⟩⟨ψ|`
pub fn density_from_pure(psi: &Amplitudes) -> DensityMatrix {
    let v = psi.vector();
    DensityMatrix::from_trusted(v * v.adjoint())
}

/// Averages `|ψ(θ)⟩⟨ψ(θ)|` over `grid_size` uniform phases in `[0, 2π)`.
///
/// This is how phase-randomized mixtures are encoded; with the Bell-phase
/// family the coherences cancel exactly on any grid of two or more points.
pub fn phase_average<F>(family: F, grid_size: usize) -> Result<DensityMatrix>
where
    F: Fn(f64) -> Amplitudes,
{
    if grid_size < 2 {
        return Err(Error::Argument("phase grid needs at least 2 points".into()));
    }
    let mut acc = Mat4::zeros();
    for k in 0..grid_size {
        let theta = 2.0 * PI * k as f64 / grid_size as f64;
        acc += density_from_pure(&family(theta)).0;
    }
    DensityMatrix::new(acc / c(grid_size as f64, 0.0))
}

pub fn zz_correlation(rho: &DensityMatrix) -> f64 {
    // σz⊗σz is diagonal: (+1, −1, −1, +1).
    let m = rho.matrix();
    m[(0, 0)].re - m[(1, 1)].re - m[(2, 2)].re + m[(3, 3)].re
}

/// Named states used in training and testing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogState {
    /// `(|00⟩ + e^{iδ}|11⟩)/√2`
    Bell {
        delta: f64,
    },
    /// `(|01⟩ + |10⟩)/√2`
    Epr,
    /// `(|0⟩+|1⟩)_A(|0⟩+|1⟩)_B / 2`
    Flat,
    /// `|0⟩_A(|0⟩+γ|1⟩)_B`, normalized
    Correlated {
        gamma: f64,
    },
    /// `(|01⟩ + |10⟩ + |11⟩)/√3`
    Partial,
    /// `(|00⟩⟨00| + |11⟩⟨11|)/2`
    Mixed,
    Ket00,
    /// `(|10⟩ + 0.9|11⟩)/√1.81`
    Ket10Ket11,
    /// `(|00⟩ + |10⟩ + |11⟩)/√3`
    Partial2,
}

/// Grid used to build the mixed catalog state from the Bell-phase family.
pub const MIXED_PHASE_GRID: usize = 16;

/// Optional numeric parameters for parameterized catalog entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateParams {
    pub delta: f64,
    pub gamma: f64,
}

impl Default for StateParams {
    fn default() -> Self {
        Self {
            delta: 0.0,
            gamma: 0.5,
        }
    }
}

impl CatalogState {
    pub const NAMES: [&'static str; 9] = [
        "bell",
        "epr",
        "flat",
        "C",
        "P",
        "M",
        "ket00",
        "ket10_09_11",
        "P2",
    ];

    pub fn parse(name: &str, params: StateParams) -> Result<Self> {
        let state = match name.trim().to_ascii_lowercase().as_str() {
            "bell" => Self::Bell {
                delta: params.delta,
            },
            "epr" => Self::Epr,
            "flat" => Self::Flat,
            "c" => Self::Correlated {
                gamma: params.gamma,
            },
            "p" => Self::Partial,
            "m" => Self::Mixed,
            "ket00" | "00" => Self::Ket00,
            "ket10_09_11" => Self::Ket10Ket11,
            "p2" => Self::Partial2,
            _ => return Err(Error::UnknownState(name.to_string())),
        };
        Ok(state)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bell { .. } => "bell",
            Self::Epr => "epr",
            Self::Flat => "flat",
            Self::Correlated { .. } => "C",
            Self::Partial => "P",
            Self::Mixed => "M",
            Self::Ket00 => "ket00",
            Self::Ket10Ket11 => "ket10_09_11",
            Self::Partial2 => "P2",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Self::Bell { delta } => vec![("delta", delta)],
            Self::Correlated { gamma } => vec![("gamma", gamma)],
            _ => Vec::new(),
        }
    }

    /// Amplitudes for pure entries, `None` for the mixed state.
    pub fn amplitudes(&self) -> Option<Amplitudes> {
        let amps = match *self {
            Self::Bell { delta } => bell(delta),
            Self::Epr => Amplitudes::from_real([0.0, 1.0, 1.0, 0.0]),
            Self::Flat => Amplitudes::from_real([1.0, 1.0, 1.0, 1.0]),
            Self::Correlated { gamma } => Amplitudes::from_real([1.0, gamma, 0.0, 0.0]),
            Self::Partial => Amplitudes::from_real([0.0, 1.0, 1.0, 1.0]),
            Self::Mixed => return None,
            Self::Ket00 => Amplitudes::from_real([1.0, 0.0, 0.0, 0.0]),
            Self::Ket10Ket11 => Amplitudes::from_real([0.0, 0.0, 1.0, 0.9]),
            Self::Partial2 => Amplitudes::from_real([1.0, 0.0, 1.0, 1.0]),
        };
        Some(amps.expect("catalog amplitudes are nonzero"))
    }

    pub fn density(&self) -> DensityMatrix {
        match self.amplitudes() {
            Some(a) => a.density(),
            None => phase_average(|theta| bell(theta).expect("nonzero"), MIXED_PHASE_GRID)
                .expect("phase average of a valid family"),
        }
    }

    pub fn entry(&self) -> CatalogEntry {
        CatalogEntry {
            name: self.name().to_string(),
            state: self.density(),
            params: self.params(),
        }
    }
}

impl FromStr for CatalogState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, StateParams::default())
    }
}

impl fmt::Display for CatalogState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        for (k, v) in self.params() {
            write!(f, "({k}={v})")?;
        }
        Ok(())
    }
}

fn bell(delta: f64) -> Result<Amplitudes> {
    Amplitudes::normalize([c(1.0, 0.0), ZERO, ZERO, C64::from_polar(1.0, delta)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub state: DensityMatrix,
    pub params: Vec<(&'static str, f64)>,
}

/// Looks up a catalog state by name.
pub fn catalog(name: &str, params: StateParams) -> Result<CatalogEntry> {
    Ok(CatalogState::parse(name, params)?.entry())
}
