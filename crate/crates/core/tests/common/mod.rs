#![allow(dead_code)]

use qtemporal_core::linalg::{c, Mat4, C64};
use qtemporal_core::{Amplitudes, DensityMatrix};
use rand::Rng;

pub fn random_amplitudes(rng: &mut impl Rng) -> Amplitudes {
    let raw = [(); 4].map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    Amplitudes::normalize(raw).expect("nonzero with probability one")
}

/// `G·G†/Tr` for a random complex `4×rank` matrix `G`.
pub fn random_density(rng: &mut impl Rng, rank: usize) -> DensityMatrix {
    let g = nalgebra::OMatrix::<C64, nalgebra::U4, nalgebra::Dyn>::from_fn(rank, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m: Mat4 = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr).expect("valid by construction")
}

/// Swaps the two qubits.
pub fn swap() -> Mat4 {
    let mut s = Mat4::zeros();
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        s[(i, j)] = c(1.0, 0.0);
    }
    s
}
