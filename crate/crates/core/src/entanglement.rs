//! Entanglement oracles used to produce and cross-check targets.
//!
//! Concurrence and the PPT test are closed-form. The distance measures
//! (relative entropy and Bures) are minimized numerically over pure product
//! states, parameterized by two Bloch-sphere points.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{
    self, c, eigvals_hermitian2, kron, partial_trace_b, partial_transpose_b, pauli_y,
    HermitianEigen, Mat4, Vec4, C64, EIGEN_FLOOR,
};
use crate::qstate::{Amplitudes, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Bits,
    Nats,
}

impl LogBase {
    fn log(&self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.log2(),
            LogBase::Nats => x.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Concurrence,
    EntropyBits,
    RelativeEntropyBits,
    Bures,
}

impl Metric {
    pub fn label(&self) -> &'static str {
        match self {
            Metric::Concurrence => "concurrence",
            Metric::EntropyBits => "entropy_bits",
            Metric::RelativeEntropyBits => "relative_entropy_bits",
            Metric::Bures => "bures",
        }
    }
}

/// Distance used by [`nearest_product`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Bures,
    RelativeEntropy,
}

/// Two Bloch-sphere points: qubit A is `cos(θA/2)|0⟩ + e^{iφA} sin(θA/2)|1⟩`,
/// likewise B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductStateParams {
    pub theta_a: f64,
    pub phi_a: f64,
    pub theta_b: f64,
    pub phi_b: f64,
}

impl ProductStateParams {
    fn from_array(x: [f64; 4]) -> Self {
        Self {
            theta_a: x[0],
            phi_a: x[1],
            theta_b: x[2],
            phi_b: x[3],
        }
    }

    fn qubit(theta: f64, phi: f64) -> [C64; 2] {
        let (s, co) = (0.5 * theta).sin_cos();
        [c(co, 0.0), C64::from_polar(s, phi)]
    }

    pub fn amplitudes(&self) -> Amplitudes {
        Amplitudes::normalize(self.raw()).expect("product of unit qubits")
    }

    fn raw(&self) -> [C64; 4] {
        let a = Self::qubit(self.theta_a, self.phi_a);
        let b = Self::qubit(self.theta_b, self.phi_b);
        [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    }

    fn vector(&self) -> Vec4 {
        Vec4::from_column_slice(&self.raw())
    }

    /// Same state with `θ ∈ [0, π]` and `φ ∈ [0, 2π)`.
    pub fn canonical(&self) -> Self {
        fn fold(theta: f64, phi: f64) -> (f64, f64) {
            let tau = std::f64::consts::TAU;
            let mut t = theta.rem_euclid(tau);
            let mut p = phi;
            if t > std::f64::consts::PI {
                t = tau - t;
                p += std::f64::consts::PI;
            }
            (t, p.rem_euclid(tau))
        }
        let (theta_a, phi_a) = fold(self.theta_a, self.phi_a);
        let (theta_b, phi_b) = fold(self.theta_b, self.phi_b);
        Self {
            theta_a,
            phi_a,
            theta_b,
            phi_b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `+∞` when the support of the input is not contained in the witness.
    pub value: f64,
    pub metric: Metric,
    pub witness: Option<ProductStateParams>,
    /// Relative entropy against the witness smoothed with `I/4`; only set
    /// for relative-entropy searches.
    pub smoothed: Option<f64>,
}

/// Wootters concurrence `max(0, λ1 − λ2 − λ3 − λ4)`.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    // With ρ = W·W†, the square roots of the eigenvalues of ρ·ρ̃ are the
    // singular values of Wᵀ·(σy⊗σy)·W.
    let w = factor(rho);
    let yy = DMatrix::from_column_slice(4, 4, kron(&pauli_y(), &pauli_y()).as_slice());
    let tau = w.transpose() * yy * &w;
    let mut l: Vec<f64> = tau.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    l.resize(4, 0.0);
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

/// `W` with `ρ = W·W†`, one column `√λ·v` per eigenvalue above the floor.
/// Working with factors avoids square roots of round-off eigenvalues.
fn factor(rho: &DensityMatrix) -> DMatrix<C64> {
    let eig = rho.eigen();
    let keep: Vec<usize> = (0..4).filter(|&k| eig.values[k] > EIGEN_FLOOR).collect();
    DMatrix::from_fn(4, keep.len(), |i, j| {
        eig.vectors[(i, keep[j])] * eig.values[keep[j]].sqrt()
    })
}

/// Closed form `2|a00·a11 − a01·a10|` for pure states.
pub fn pure_concurrence(psi: &Amplitudes) -> f64 {
    let a = psi.as_array();
    2.0 * (a[0] * a[3] - a[1] * a[2]).norm()
}

/// Eigenvalues of qubit A's reduced state, descending.
pub fn schmidt_weights(psi: &Amplitudes) -> [f64; 2] {
    let rho_a = partial_trace_b(psi.density().matrix());
    let [lo, hi] = eigvals_hermitian2(&rho_a);
    [hi.clamp(0.0, 1.0), lo.clamp(0.0, 1.0)]
}

fn shannon(weights: impl IntoIterator<Item = f64>, base: LogBase) -> f64 {
    weights
        .into_iter()
        .filter(|&p| p > EIGEN_FLOOR)
        .map(|p| -p * base.log(p))
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy of the reduced state of a pure input.
pub fn entanglement_entropy(psi: &Amplitudes, base: LogBase) -> f64 {
    shannon(schmidt_weights(psi), base)
}

pub fn entanglement_entropy_bits(psi: &Amplitudes) -> f64 {
    entanglement_entropy(psi, LogBase::Bits)
}

/// `Tr[ρ*(log ρ* − log ρ)]`, or `+∞` when `ρ*` has weight outside the
/// support of `ρ`.
pub fn relative_entropy(rho_star: &DensityMatrix, rho: &DensityMatrix, base: LogBase) -> f64 {
    let own = -shannon(rho_star.eigen().values, base);
    let eig = rho.eigen();
    let m = rho_star.matrix();
    let mut cross = 0.0;
    for k in 0..4 {
        let v = eig.vectors.column(k);
        let weight = (v.adjoint() * m * v)[(0, 0)].re;
        let lambda = eig.values[k];
        if lambda <= EIGEN_FLOOR {
            if weight > EIGEN_FLOOR {
                return f64::INFINITY;
            }
            continue;
        }
        cross -= weight * base.log(lambda);
    }
    (own + cross).max(0.0)
}

/// Uhlmann fidelity `(Tr √(√ρ·ρ*·√ρ))²`.
pub fn fidelity(rho_star: &DensityMatrix, rho: &DensityMatrix) -> f64 {
    // Tr√(√ρ·ρ*·√ρ) is the trace norm of Y†·W for ρ = W·W†, ρ* = Y·Y†.
    let overlap = factor(rho_star).adjoint() * factor(rho);
    let tr: f64 = overlap.singular_values().iter().sum();
    (tr * tr).min(1.0)
}

/// `2 − 2√F`
pub fn bures_distance(rho_star: &DensityMatrix, rho: &DensityMatrix) -> f64 {
    (2.0 - 2.0 * fidelity(rho_star, rho).sqrt()).max(0.0)
}

/// Bures distance from a pure state to its nearest pure product state,
/// `2 − 2√λmax`, from the Schmidt decomposition.
pub fn schmidt_bures(psi: &Amplitudes) -> f64 {
    (2.0 - 2.0 * schmidt_weights(psi)[0].sqrt()).max(0.0)
}

/// True iff the partial transpose is positive semidefinite (to `−1e-10`),
/// which for two qubits is equivalent to separability.
pub fn ppt_separable(rho: &DensityMatrix) -> bool {
    HermitianEigen::new(&partial_transpose_b(rho.matrix())).min() >= -1e-10
}

/// Weight of `I/4` mixed into the witness for relative-entropy searches.
pub const RELATIVE_ENTROPY_SMOOTHING: f64 = 1e-6;

/// Multi-start search settings for [`nearest_product`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Seeded random starts added to the 16-point grid.
    pub random_starts: usize,
    pub seed: u64,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            random_starts: 16,
            seed: 0x5eed,
            initial_step: 0.5,
            min_step: 1e-9,
        }
    }
}

/// Minimizes the distance from `rho_star` to the pure product states.
pub fn nearest_product(rho_star: &DensityMatrix, distance: Distance) -> OracleResult {
    nearest_product_with(rho_star, distance, &SearchConfig::default())
}

pub fn nearest_product_with(
    rho_star: &DensityMatrix,
    distance: Distance,
    cfg: &SearchConfig,
) -> OracleResult {
    let m = *rho_star.matrix();
    match distance {
        Distance::Bures => {
            // For a pure candidate F = ⟨φ|ρ*|φ⟩; maximize it.
            let objective = |x: &[f64; 4]| {
                let v = ProductStateParams::from_array(*x).vector();
                -(v.adjoint() * m * v)[(0, 0)].re
            };
            let (best, _) = multi_start(objective, cfg);
            let witness = ProductStateParams::from_array(best);
            let f = (witness.vector().adjoint() * m * witness.vector())[(0, 0)].re;
            OracleResult {
                value: (2.0 - 2.0 * f.clamp(0.0, 1.0).sqrt()).max(0.0),
                metric: Metric::Bures,
                witness: Some(witness.canonical()),
                smoothed: None,
            }
        }
        Distance::RelativeEntropy => {
            let smoothed_state = |x: &[f64; 4]| {
                let v = ProductStateParams::from_array(*x).vector();
                let w = RELATIVE_ENTROPY_SMOOTHING;
                DensityMatrix::from_trusted(
                    v * v.adjoint() * c(1.0 - w, 0.0) + Mat4::identity() * c(w / 4.0, 0.0),
                )
            };
            let objective =
                |x: &[f64; 4]| relative_entropy(rho_star, &smoothed_state(x), LogBase::Bits);
            let (best, smoothed) = multi_start(objective, cfg);
            let witness = ProductStateParams::from_array(best);
            let pure = witness.amplitudes().density();
            OracleResult {
                value: relative_entropy(rho_star, &pure, LogBase::Bits),
                metric: Metric::RelativeEntropyBits,
                witness: Some(witness.canonical()),
                smoothed: Some(smoothed),
            }
        }
    }
}

fn starts(cfg: &SearchConfig) -> Vec<[f64; 4]> {
    use std::f64::consts::PI;
    let mut out = Vec::with_capacity(16 + cfg.random_starts);
    for &ta in &[PI / 3.0, 2.0 * PI / 3.0] {
        for &pa in &[0.0, PI] {
            for &tb in &[PI / 3.0, 2.0 * PI / 3.0] {
                for &pb in &[PI / 2.0, 3.0 * PI / 2.0] {
                    out.push([ta, pa, tb, pb]);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_starts {
        out.push([
            rng.gen_range(0.0..PI),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..PI),
            rng.gen_range(0.0..2.0 * PI),
        ]);
    }
    out
}

/// Compass search from every start; ties go to the lowest start index.
fn multi_start<F: Fn(&[f64; 4]) -> f64>(f: F, cfg: &SearchConfig) -> ([f64; 4], f64) {
    let mut best: Option<([f64; 4], f64)> = None;
    for x0 in starts(cfg) {
        let (x, v) = compass_search(&f, x0, cfg.initial_step, cfg.min_step);
        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
            best = Some((x, v));
        }
    }
    best.expect("at least one start")
}

fn compass_search<F: Fn(&[f64; 4]) -> f64>(
    f: &F,
    mut x: [f64; 4],
    mut step: f64,
    min_step: f64,
) -> ([f64; 4], f64) {
    let mut fx = f(&x);
    while step >= min_step {
        let mut improved = false;
        for i in 0..4 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[i] += dir * step;
                let fy = f(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// One catalog row of oracle values.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub classical_correlation: f64,
    pub concurrence: f64,
    /// Entropy of entanglement; `None` for mixed inputs.
    pub entropy_bits: Option<f64>,
    pub bures_to_product: f64,
    pub ppt: bool,
}

pub fn oracle_row(rho: &DensityMatrix) -> OracleRow {
    OracleRow {
        classical_correlation: rho.zz_correlation(),
        concurrence: concurrence(rho),
        entropy_bits: rho
            .as_pure(1e-10)
            .map(|psi| entanglement_entropy_bits(&psi)),
        bures_to_product: nearest_product(rho, Distance::Bures).value,
        ppt: ppt_separable(rho),
    }
}

/// Random single-qubit unitary from three seeded Euler angles.
pub fn random_local_unitary(rng: &mut impl Rng) -> linalg::Mat2 {
    use std::f64::consts::PI;
    let a = rng.gen_range(0.0..2.0 * PI);
    let b = rng.gen_range(0.0..PI);
    let g = rng.gen_range(0.0..2.0 * PI);
    linalg::expm_su2(0.0, 0.0, 1.0, 0.5 * a)
        * linalg::expm_su2(0.0, 1.0, 0.0, 0.5 * b)
        * linalg::expm_su2(0.0, 0.0, 1.0, 0.5 * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::CatalogState;

    fn rho(s: CatalogState) -> DensityMatrix {
        s.density()
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence(&rho(CatalogState::Bell { delta: 0.0 })) - 1.0).abs() < 1e-9);
        assert!((concurrence(&rho(CatalogState::Epr)) - 1.0).abs() < 1e-9);
        assert!(concurrence(&rho(CatalogState::Flat)) < 1e-9);
        assert!(concurrence(&rho(CatalogState::Correlated { gamma: 0.5 })) < 1e-9);
        assert!((concurrence(&rho(CatalogState::Partial)) - 2.0 / 3.0).abs() < 1e-9);
        assert!(concurrence(&rho(CatalogState::Mixed)) < 1e-9);
    }

    #[test]
    fn concurrence_matches_pure_formula() {
        for s in [
            CatalogState::Partial,
            CatalogState::Partial2,
            CatalogState::Ket10Ket11,
        ] {
            let psi = s.amplitudes().unwrap();
            assert!((concurrence(&psi.density()) - pure_concurrence(&psi)).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_examples() {
        for delta in [0.0, 0.7, 2.0] {
            let psi = CatalogState::Bell { delta }.amplitudes().unwrap();
            assert!((entanglement_entropy_bits(&psi) - 1.0).abs() < 1e-12);
        }
        for s in [
            CatalogState::Flat,
            CatalogState::Correlated { gamma: 0.5 },
            CatalogState::Ket00,
        ] {
            assert!(entanglement_entropy_bits(&s.amplitudes().unwrap()) < 1e-12);
        }
        // Reduced state [[1/3,1/3],[1/3,2/3]]: eigenvalues (1 ± √5/3)/2.
        let p = (1.0 + 5f64.sqrt() / 3.0) / 2.0;
        let q = 1.0 - p;
        let want = -p * p.log2() - q * q.log2();
        let got = entanglement_entropy_bits(&CatalogState::Partial.amplitudes().unwrap());
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.5500).abs() < 1e-4);
    }

    #[test]
    fn nats_toggle() {
        let psi = CatalogState::Bell { delta: 0.0 }.amplitudes().unwrap();
        let nats = entanglement_entropy(&psi, LogBase::Nats);
        assert!((nats - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let bell = rho(CatalogState::Bell { delta: 0.0 });
        assert!(relative_entropy(&bell, &bell, LogBase::Bits).abs() < 1e-9);
        let maximally_mixed = DensityMatrix::new(Mat4::identity() * c(0.25, 0.0)).unwrap();
        assert!((relative_entropy(&bell, &maximally_mixed, LogBase::Bits) - 2.0).abs() < 1e-12);
        let m = rho(CatalogState::Mixed);
        assert!((relative_entropy(&bell, &m, LogBase::Bits) - 1.0).abs() < 1e-9);
        // Support mismatch.
        assert_eq!(
            relative_entropy(&bell, &rho(CatalogState::Ket00), LogBase::Bits),
            f64::INFINITY
        );
    }

    #[test]
    fn bures_examples() {
        let bell = rho(CatalogState::Bell { delta: 0.0 });
        assert!(bures_distance(&bell, &bell) < 1e-7);
        // |⟨Bell|flat⟩| = 1/√2, same as against |00⟩.
        let want = 2.0 - 2f64.sqrt();
        assert!((bures_distance(&bell, &rho(CatalogState::Flat)) - want).abs() < 1e-7);
        assert!((bures_distance(&bell, &rho(CatalogState::Ket00)) - want).abs() < 1e-7);
    }

    #[test]
    fn nearest_product_examples() {
        let bell = nearest_product(&rho(CatalogState::Bell { delta: 0.0 }), Distance::Bures);
        assert!((bell.value - (2.0 - 2f64.sqrt())).abs() < 1e-7);

        let flat = nearest_product(&rho(CatalogState::Flat), Distance::Bures);
        assert!(flat.value < 1e-7);
        let w = flat.witness.unwrap().amplitudes();
        let overlap = (w.vector().adjoint() * CatalogState::Flat.amplitudes().unwrap().vector())
            [(0, 0)]
            .norm();
        assert!((overlap - 1.0).abs() < 1e-7);

        let p = nearest_product(&rho(CatalogState::Partial), Distance::Bures);
        let lambda = (3.0 + 5f64.sqrt()) / 6.0;
        assert!((p.value - (2.0 - 2.0 * lambda.sqrt())).abs() < 1e-7);
        assert!((p.value - 0.1316).abs() < 1e-4);
    }

    #[test]
    fn witness_is_canonical() {
        let r = nearest_product(&rho(CatalogState::Partial2), Distance::Bures);
        let w = r.witness.unwrap();
        for t in [w.theta_a, w.theta_b] {
            assert!((0.0..=std::f64::consts::PI).contains(&t));
        }
        for p in [w.phi_a, w.phi_b] {
            assert!((0.0..std::f64::consts::TAU).contains(&p));
        }
    }

    #[test]
    fn relative_entropy_search_flags_entangled_pure_input() {
        let r = nearest_product(
            &rho(CatalogState::Bell { delta: 0.0 }),
            Distance::RelativeEntropy,
        );
        assert_eq!(r.value, f64::INFINITY);
        assert!(r.smoothed.unwrap().is_finite());

        let r = nearest_product(&rho(CatalogState::Flat), Distance::RelativeEntropy);
        assert!(r.value < 1e-6, "{}", r.value);
    }

    #[test]
    fn ppt_examples() {
        assert!(!ppt_separable(&rho(CatalogState::Bell { delta: 0.0 })));
        let pt = partial_transpose_b(rho(CatalogState::Bell { delta: 0.0 }).matrix());
        assert!((HermitianEigen::new(&pt).min() + 0.5).abs() < 1e-12);
        assert!(ppt_separable(&rho(CatalogState::Mixed)));
        assert!(ppt_separable(&rho(CatalogState::Flat)));
        assert!(!ppt_separable(&rho(CatalogState::Partial)));
    }
}
