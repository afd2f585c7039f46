//! Self-checks of the numerical core, each reported with the measured value
//! next to its tolerance.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entanglement::{self, Distance, LogBase};
use crate::evolve::{self, PathSum, Schedule, SliceParams, SpinPair};
use crate::linalg::{self, Mat4};
use crate::qnn::{self, GradientMethod, NetworkWeights, ParamKind};
use crate::qstate::CatalogState;
use crate::train::{self, P_TARGET_EXACT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    Within(f64, f64),
}

impl Bound {
    pub fn admits(&self, x: f64) -> bool {
        match *self {
            Bound::AtMost(t) => x <= t,
            Bound::Within(lo, hi) => (lo..=hi).contains(&x),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(t) => write!(f, "<= {t:e}"),
            Bound::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, bound: Bound) -> Self {
        // NaN never passes.
        let passed = bound.admits(measured);
        Self {
            name: name.into(),
            measured,
            bound,
            passed,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.3e} (tolerance {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.bound
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Deliberate defects for testing that the checks can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Fault {
    /// Run the backward leg of the unitarity check with the wrong sign of
    /// `dt`, so it no longer undoes the forward evolution.
    pub flip_dt_sign: bool,
}

/// Schedule with `K, eps ∈ [−0.5, 0.5]`, `J ∈ [−0.3, 0.3]` and
/// `dt ∈ [0.2, 1]`.
pub fn random_schedule(rng: &mut impl Rng, slices: usize) -> Schedule {
    let dt = rng.gen_range(0.2..1.0);
    let slices = (0..slices)
        .map(|_| {
            SliceParams::new(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.3..0.3),
            )
        })
        .collect();
    Schedule::new(dt, slices).expect("valid by construction")
}

/// Weights with every parameter trainable and drawn from `[−0.4, 0.4]`.
pub fn random_weights(rng: &mut impl Rng, slices: usize, dt: f64) -> NetworkWeights {
    let s = Schedule::new(
        dt,
        (0..slices)
            .map(|_| {
                SliceParams::new(
                    rng.gen_range(-0.4..0.4),
                    rng.gen_range(-0.4..0.4),
                    rng.gen_range(-0.4..0.4),
                )
            })
            .collect(),
    )
    .expect("valid by construction");
    let mask = NetworkWeights::mask_for(slices, &[ParamKind::K, ParamKind::Eps, ParamKind::J]);
    NetworkWeights::new(s, mask).expect("mask length matches")
}

/// Largest deviation between the path sum and the split-operator product
/// over all 16 input/output pairs.
pub fn path_sum_deviation(s: &Schedule) -> f64 {
    let split = evolve::split_propagator(s);
    let engine = PathSum::default();
    let mut worst: f64 = 0.0;
    for a in SpinPair::ALL {
        for b in SpinPair::ALL {
            let amp = engine.amplitude(a, b, s).expect("within path-sum cap");
            worst = worst.max((amp - split[(b.index(), a.index())]).norm());
        }
    }
    worst
}

/// `max(‖U†U − I‖, ‖U_back·U − I‖)`, where `U_back` replays the slices in
/// reverse with `−dt`.
pub fn unitarity_deviation(s: &Schedule, fault: Fault) -> f64 {
    let u = evolve::propagator(s);
    let back_dt = if fault.flip_dt_sign { s.dt } else { -s.dt };
    let back = s.slices.iter().rev().fold(Mat4::identity(), |acc, p| {
        evolve::slice_unitary(p, back_dt) * acc
    });
    let reversal = linalg::max_abs(&(back * u - Mat4::identity()));
    linalg::unitarity_residue(&u).max(reversal)
}

pub fn run(seed: u64, fault: Fault) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let schedules: Vec<Schedule> = (0..4).map(|i| random_schedule(&mut rng, 3 + i)).collect();
    let path = schedules.iter().map(path_sum_deviation).fold(0.0, f64::max);
    checks.push(Check::new(
        "path sum vs split product",
        path,
        Bound::AtMost(1e-10),
    ));

    let unit = schedules
        .iter()
        .map(|s| unitarity_deviation(s, fault))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "propagator unitarity",
        unit,
        Bound::AtMost(1e-11),
    ));

    let ratio = evolve::split_halving_ratio(&SliceParams::new(0.3, 0.2, 0.1), 0.05);
    checks.push(Check::new(
        "split step-halving ratio",
        ratio,
        Bound::Within(3.5, 4.5),
    ));

    let data = train::table2_dataset(P_TARGET_EXACT);
    let mut grad_dev: f64 = 0.0;
    for _ in 0..20 {
        let w = random_weights(&mut rng, qnn::DEFAULT_SLICES, qnn::DEFAULT_DT);
        let a = qnn::gradient(&w, &data, GradientMethod::Analytic).expect("nonempty data");
        let n = qnn::gradient(&w, &data, GradientMethod::CentralDifference { h: 1e-5 })
            .expect("nonempty data");
        grad_dev = grad_dev.max(a.relative_distance(&n));
    }
    checks.push(Check::new(
        "analytic vs central-difference gradient",
        grad_dev,
        Bound::AtMost(1e-6),
    ));

    let analytic = NetworkWeights::analytic();
    let g = qnn::gradient(&analytic, &data, GradientMethod::Analytic).expect("nonempty data");
    checks.push(Check::new(
        "gradient norm at closed-form solution",
        g.norm(),
        Bound::AtMost(1e-8),
    ));

    let mut desired_err: f64 = 0.0;
    for pair in data.iter().chain(&train::table3_dataset(P_TARGET_EXACT)) {
        desired_err = desired_err.max((qnn::forward(&pair.state, &analytic) - pair.target).abs());
    }
    checks.push(Check::new(
        "closed-form solution outputs",
        desired_err,
        Bound::AtMost(1e-9),
    ));

    let bell = CatalogState::Bell { delta: 0.0 }.density();
    let bures = entanglement::nearest_product(&bell, Distance::Bures).value;
    checks.push(Check::new(
        "Bell Bures distance to product states",
        (bures - (2.0 - 2f64.sqrt())).abs(),
        Bound::AtMost(1e-7),
    ));
    let rel = entanglement::relative_entropy(&bell, &CatalogState::Mixed.density(), LogBase::Bits);
    checks.push(Check::new(
        "Bell relative entropy vs M",
        (rel - 1.0).abs(),
        Bound::AtMost(1e-9),
    ));

    let expected = [
        (CatalogState::Bell { delta: 0.0 }, 1.0),
        (CatalogState::Epr, 1.0),
        (CatalogState::Flat, 0.0),
        (CatalogState::Correlated { gamma: 0.5 }, 0.0),
        (CatalogState::Partial, 2.0 / 3.0),
        (CatalogState::Mixed, 0.0),
    ];
    let conc = expected
        .iter()
        .map(|(s, c)| (entanglement::concurrence(&s.density()) - c).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new("catalog concurrence", conc, Bound::AtMost(1e-9)));

    let ppt_mismatch = expected
        .iter()
        .filter(|(s, _)| {
            let rho = s.density();
            entanglement::ppt_separable(&rho) != (entanglement::concurrence(&rho) < 1e-9)
        })
        .count();
    checks.push(Check::new(
        "PPT agrees with zero concurrence (mismatches)",
        ppt_mismatch as f64,
        Bound::AtMost(0.0),
    ));

    let ising = evolve::ising_bond_strength(PI / 8.0, 1.0).expect("in domain");
    let want = -0.5 * (PI / 8.0).tan().ln();
    checks.push(Check::new(
        "Ising bond closed form",
        (ising - want).abs(),
        Bound::AtMost(1e-12),
    ));

    VerifyReport { checks }
}
