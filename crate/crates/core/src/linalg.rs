//! Small dense complex linear algebra for the two-qubit Hilbert space.
//!
//! Everything here works on fixed-size `4×4` (two qubits) or `2×2` (one
//! qubit) matrices. Basis ordering is `|00⟩, |01⟩, |10⟩, |11⟩` with qubit A
//! as the left tensor factor.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Vec4 = Vector4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Eigenvalues at or below this are treated as zero for logarithms and
/// square roots.
pub const EIGEN_FLOOR: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

/// Kronecker product `a ⊗ b`; `a` acts on qubit A.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// `σz ⊗ σz`, the measured correlation observable.
pub fn zz() -> Mat4 {
    kron(&pauli_z(), &pauli_z())
}

/// `σx ⊗ I + I ⊗ σx`
pub fn sum_x() -> Mat4 {
    kron(&pauli_x(), &identity2()) + kron(&identity2(), &pauli_x())
}

/// `σz ⊗ I + I ⊗ σz`
pub fn sum_z() -> Mat4 {
    kron(&pauli_z(), &identity2()) + kron(&identity2(), &pauli_z())
}

pub fn trace(m: &Mat4) -> C64 {
    m.trace()
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn unitarity_residue(u: &Mat4) -> f64 {
    max_abs(&(u.adjoint() * u - Mat4::identity()))
}

pub fn hermiticity_residue(m: &Mat4) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues in ascending
/// order and the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: [f64; 4],
    pub vectors: Mat4,
}

impl HermitianEigen {
    pub fn new(m: &Mat4) -> Self {
        // Symmetrize first so tiny anti-Hermitian noise never reaches the solver.
        let h = (m + m.adjoint()) * c(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let mut order: [usize; 4] = [0, 1, 2, 3];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.map(|k| eig.eigenvalues[k]);
        let vectors = Mat4::from_fn(|r, col| eig.eigenvectors[(r, order[col])]);
        Self { values, vectors }
    }

    /// `V · diag(f(λ)) · V†`
    pub fn apply<F: Fn(f64) -> C64>(&self, f: F) -> Mat4 {
        let v = &self.vectors;
        let mut scaled = *v;
        for col in 0..4 {
            let fl = f(self.values[col]);
            for r in 0..4 {
                scaled[(r, col)] *= fl;
            }
        }
        scaled * v.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[3]
    }
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues below [`EIGEN_FLOOR`] are clamped to zero.
pub fn psd_sqrt(m: &Mat4) -> Mat4 {
    HermitianEigen::new(m).apply(|l| {
        if l <= EIGEN_FLOOR {
            ZERO
        } else {
            c(l.sqrt(), 0.0)
        }
    })
}

/// `exp(−i·H·t)` for Hermitian `H`, via exact eigendecomposition.
pub fn expm_hermitian(h: &Mat4, t: f64) -> Mat4 {
    HermitianEigen::new(h).apply(|l| C64::from_polar(1.0, -l * t))
}

/// `exp(−i·t·(a·σ))` for a real Bloch vector `a`, in closed form.
pub fn expm_su2(ax: f64, ay: f64, az: f64, t: f64) -> Mat2 {
    let r = (ax * ax + ay * ay + az * az).sqrt();
    let theta = r * t;
    if theta == 0.0 {
        return identity2();
    }
    let (s, co) = theta.sin_cos();
    let gen = pauli_x() * c(ax / r, 0.0) + pauli_y() * c(ay / r, 0.0) + pauli_z() * c(az / r, 0.0);
    identity2() * c(co, 0.0) - gen * c(0.0, s)
}

/// Partial trace over qubit B.
pub fn partial_trace_b(m: &Mat4) -> Mat2 {
    Mat2::from_fn(|r, col| m[(2 * r, 2 * col)] + m[(2 * r + 1, 2 * col + 1)])
}

/// Partial transpose over qubit B.
pub fn partial_transpose_b(m: &Mat4) -> Mat4 {
    Mat4::from_fn(|r, col| {
        let (a, b) = (r / 2, r % 2);
        let (ap, bp) = (col / 2, col % 2);
        m[(2 * a + bp, 2 * ap + b)]
    })
}

/// Eigenvalues of a 2×2 Hermitian matrix, ascending.
pub fn eigvals_hermitian2(m: &Mat2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - half, mean + half]
}
