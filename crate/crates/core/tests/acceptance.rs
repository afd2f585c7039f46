//! Acceptance criteria 1–10. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line whether or not it succeeds; exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::process::ExitCode;

use qtemporal_core::baseline::{self, MlpConfig};
use qtemporal_core::entanglement::{self, Distance, LogBase};
use qtemporal_core::evolve::{self, SliceParams};
use qtemporal_core::qnn::{self, GradientMethod, NetworkWeights};
use qtemporal_core::qstate::CatalogState;
use qtemporal_core::train::{
    self, Init, TrainConfig, TrainReport, TrainStatus, P_TARGET, P_TARGET_EXACT,
};
use qtemporal_core::verify;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Shared results of the training-set run with the default configuration.
struct Trained {
    report: TrainReport,
}

impl Trained {
    fn run() -> Self {
        let report = train::train(&train::table2_dataset(P_TARGET), &TrainConfig::default())
            .expect("default training runs");
        Self { report }
    }
}

fn criterion_1(trained: &Trained) -> Outcome {
    let data = train::table2_dataset(P_TARGET);
    let want = [1.0, 0.0, 0.0, P_TARGET];

    // As written: exact zero weights.
    let zero_cfg = TrainConfig {
        init: Init::Zero,
        ..TrainConfig::default()
    };
    let zero = train::train(&data, &zero_cfg).expect("zero-init training runs");
    let zero_ok = zero.final_rms <= 1e-3
        && zero.epochs_run <= 5000
        && close(&zero.per_pair_outputs, &want, 0.01);

    let r = &trained.report;
    let default_ok =
        r.final_rms <= 1e-3 && r.epochs_run <= 5000 && close(&r.per_pair_outputs, &want, 0.01);

    outcome(
        zero_ok,
        format!(
            "zero init: status {} after {} epoch(s), rms {:.3e}, outputs {} \
             (all-zero weights are a stationary point of the loss); \
             default tunneling init K=0.2: status {}, {} epochs, rms {:.3e}, outputs {} -> {}",
            zero.status.label(),
            zero.epochs_run,
            zero.final_rms,
            fmt(&zero.per_pair_outputs),
            r.status.label(),
            r.epochs_run,
            r.final_rms,
            fmt(&r.per_pair_outputs),
            if default_ok {
                "meets the RMS and output tolerances"
            } else {
                "misses tolerances"
            },
        ),
    )
}

fn criterion_2(trained: &Trained) -> (Outcome, f64) {
    let eval = train::evaluate(
        &trained.report.final_weights,
        &train::table3_dataset(P_TARGET),
    )
    .expect("evaluation runs");
    let want = [1.0, 0.0, 0.0, 0.44, 0.0];
    let ok = close(&eval.outputs, &want, 0.02) && eval.rms <= 0.02;
    (
        outcome(
            ok,
            format!(
                "test-set outputs {} rms {:.3e} (weights from the default training run)",
                fmt(&eval.outputs),
                eval.rms
            ),
        ),
        eval.rms,
    )
}

fn criterion_3() -> Outcome {
    let w = NetworkWeights::zero(qnn::DEFAULT_SLICES, qnn::DEFAULT_DT).unwrap();
    let out = train::evaluate(&w, &train::table2_dataset(P_TARGET))
        .unwrap()
        .outputs;
    let ok = close(&out, &[1.0, 0.0, 0.36, 0.11], 5e-3)
        && close(&out, &[1.0, 0.0, 0.36, 1.0 / 9.0], 1e-12);
    outcome(ok, format!("zero-weight outputs {}", fmt(&out)))
}

fn criterion_4() -> Outcome {
    let w = NetworkWeights::analytic();
    let mut data = train::table2_dataset(P_TARGET_EXACT);
    data.extend(train::table3_dataset(P_TARGET_EXACT));
    let worst = data
        .iter()
        .map(|p| (qnn::forward(&p.state, &w) - p.target).abs())
        .fold(0.0, f64::max);
    let angle = w.schedule.tunneling_angle();
    // Reference trained tunneling amplitudes.
    let reference_k = [0.21, 0.25, 0.23, 0.23];
    let reference_angle: f64 = reference_k.iter().map(|k| 2.0 * k * qnn::DEFAULT_DT).sum();
    let ok = worst <= 1e-9
        && (angle - 1.5 * PI).abs() <= 1e-12
        && (angle - reference_angle).abs() <= 0.5;
    outcome(
        ok,
        format!(
            "max |output - desired| {worst:.3e}; rotation {angle:.6} vs 3pi/2; \
             reference K give {reference_angle:.4} (diff {:.3} rad)",
            (angle - reference_angle).abs()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut path: f64 = 0.0;
    let mut unit: f64 = 0.0;
    for slices in 1..=6 {
        for _ in 0..4 {
            let s = verify::random_schedule(&mut rng, slices);
            path = path.max(verify::path_sum_deviation(&s));
            unit = unit.max(verify::unitarity_deviation(&s, Default::default()));
        }
    }
    let ratio = evolve::split_halving_ratio(&SliceParams::new(0.3, 0.2, 0.1), 0.05);
    let ok = path <= 1e-10 && (3.5..=4.5).contains(&ratio) && unit <= 1e-11;
    outcome(
        ok,
        format!(
            "path-sum deviation {path:.3e} over 24 schedules of 1-6 slices; \
             step-halving ratio {ratio:.4}; unitarity residue {unit:.3e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let data = train::table2_dataset(P_TARGET);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let w = verify::random_weights(&mut rng, qnn::DEFAULT_SLICES, qnn::DEFAULT_DT);
        let a = qnn::gradient(&w, &data, GradientMethod::Analytic).unwrap();
        let n = qnn::gradient(&w, &data, GradientMethod::CentralDifference { h: 1e-5 }).unwrap();
        worst = worst.max(a.relative_distance(&n));
    }
    let at_solution = qnn::gradient(
        &NetworkWeights::analytic(),
        &train::table2_dataset(P_TARGET_EXACT),
        GradientMethod::Analytic,
    )
    .unwrap()
    .norm();
    outcome(
        worst <= 1e-6 && at_solution <= 1e-8,
        format!(
            "max relative gradient difference {worst:.3e}; norm at closed form {at_solution:.3e}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let bell = CatalogState::Bell { delta: 0.0 }.density();
    let bures = entanglement::nearest_product(&bell, Distance::Bures).value;
    let rel = entanglement::relative_entropy(&bell, &CatalogState::Mixed.density(), LogBase::Bits);
    let table = [
        (CatalogState::Bell { delta: 0.0 }, 1.0, 1.0),
        (CatalogState::Epr, 1.0, -1.0),
        (CatalogState::Flat, 0.0, 0.0),
        (CatalogState::Correlated { gamma: 0.5 }, 0.0, 0.6),
        (CatalogState::Partial, 2.0 / 3.0, -1.0 / 3.0),
        (CatalogState::Mixed, 0.0, 1.0),
    ];
    let mut conc_err: f64 = 0.0;
    let mut corr_err: f64 = 0.0;
    let mut ppt_ok = true;
    for name in CatalogState::NAMES {
        let rho = CatalogState::parse(name, Default::default())
            .unwrap()
            .density();
        ppt_ok &= entanglement::ppt_separable(&rho) == (entanglement::concurrence(&rho) < 1e-9);
    }
    for (s, c, z) in table {
        let rho = s.density();
        conc_err = conc_err.max((entanglement::concurrence(&rho) - c).abs());
        corr_err = corr_err.max((rho.zz_correlation() - z).abs());
    }
    let p = CatalogState::Partial.amplitudes().unwrap();
    let p_entropy = entanglement::entanglement_entropy_bits(&p);
    let p_bures = entanglement::nearest_product(&p.density(), Distance::Bures).value;
    // Quoted as 0.550 bits and 0.1316; the closed forms are checked to 1e-7.
    let p_ok = (p_entropy - 0.550).abs() <= 5e-4
        && (p_bures - entanglement::schmidt_bures(&p)).abs() <= 1e-7
        && (p_bures - 0.1316).abs() <= 1e-4;

    let ok = (bures - (2.0 - 2f64.sqrt())).abs() <= 1e-7
        && (rel - 1.0).abs() <= 1e-9
        && conc_err <= 1e-9
        && corr_err <= 1e-12
        && ppt_ok
        && p_ok;
    outcome(
        ok,
        format!(
            "Bell Bures {bures:.9}; Bell vs M {rel:.12} bits; concurrence err {conc_err:.2e}; \
             correlation err {corr_err:.2e}; PPT agreement {ppt_ok}; \
             P entropy {p_entropy:.6} bits, P Bures {p_bures:.6}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let data = train::table2_dataset(P_TARGET);
    let grid = train::grid(0.05, 0.05, 0.95).unwrap();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cfg = TrainConfig::default();
    let rows = train::sweep_target("P", &grid, &data, &cfg, threads).unwrap();
    let complete = rows.len() == 19 && rows.iter().all(|r| r.trained.is_finite());

    let at_044 = train::sweep_target("P", &[P_TARGET], &data, &cfg, 1).unwrap()[0].clone();

    // Zero targets enter the loss as c⁴, so plain descent approaches the
    // exact solution like 1/epochs; give this point a larger budget.
    let exact_cfg = TrainConfig {
        max_epochs: 100_000,
        rms_stop: 1e-6,
        ..cfg
    };
    let at_exact =
        train::sweep_target("P", &[P_TARGET_EXACT], &data, &exact_cfg, 1).unwrap()[0].clone();

    let mut csv = String::from("desired,trained,rms,status\n");
    for r in rows.iter().chain([&at_044, &at_exact]) {
        writeln!(
            csv,
            "{:?},{:?},{:?},{}",
            r.desired, r.trained, r.rms, r.status
        )
        .unwrap();
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance_sweep.csv");
    let written = std::fs::write(&path, &csv).is_ok();

    let ok =
        complete && (at_044.trained - P_TARGET).abs() <= 0.01 && at_exact.rms <= 1e-6 && written;
    outcome(
        ok,
        format!(
            "{} grid rows; desired 0.44 -> {:.6}; desired 4/9 -> rms {:.3e} ({}); curve at {}",
            rows.len(),
            at_044.trained,
            at_exact.rms,
            at_exact.status,
            path.display()
        ),
    )
}

fn criterion_9(qnn_test_rms: f64) -> Outcome {
    let cfg = MlpConfig::default();
    let train_set = baseline::samples(&train::table2_dataset(P_TARGET));
    let test_set = baseline::samples(&train::table3_dataset(P_TARGET));
    let r = baseline::mlp_train(&train_set, &cfg).unwrap();
    let test = baseline::mlp_eval(&r.net, &test_set).unwrap();
    let folds = baseline::loo_experiment(&baseline::default_pool(), &cfg).unwrap();
    let all_fit = folds.iter().all(|f| f.trained);
    let loo = folds.iter().map(|f| f.abs_error).sum::<f64>() / folds.len() as f64;
    let gap = test.rms / qnn_test_rms;
    let ok = r.final_rms <= 1e-2
        && test.rms >= 0.2
        && all_fit
        && loo >= 0.1
        && qnn_test_rms <= 0.02
        && gap >= 10.0;
    outcome(
        ok,
        format!(
            "MLP train rms {:.3e}, test rms {:.4}; leave-one-out mean error {loo:.4} \
             (all folds fitted: {all_fit}); QNN test rms {qnn_test_rms:.3e}, gap {gap:.0}x",
            r.final_rms, test.rms
        ),
    )
}

fn criterion_10() -> Outcome {
    let data = train::table2_dataset(P_TARGET);
    let history_csv = || {
        let r = train::train(&data, &TrainConfig::default()).unwrap();
        let mut s = String::from("epoch,rms\n");
        for (i, x) in r.rms_history.iter().enumerate() {
            writeln!(s, "{i},{x:?}").unwrap();
        }
        for o in &r.per_pair_outputs {
            writeln!(s, "{o:?}").unwrap();
        }
        s
    };
    let sweep_csv = |threads: usize| {
        let cfg = TrainConfig {
            max_epochs: 400,
            ..TrainConfig::default()
        };
        let rows = train::sweep_target("P", &[0.1, 0.3, 0.44, 0.7], &data, &cfg, threads).unwrap();
        rows.iter()
            .map(|r| format!("{:?},{:?},{:?},{}\n", r.desired, r.trained, r.rms, r.status))
            .collect::<String>()
    };
    let mlp_csv = || {
        let r = baseline::mlp_train(
            &baseline::samples(&data),
            &MlpConfig {
                max_epochs: 2000,
                ..MlpConfig::default()
            },
        )
        .unwrap();
        r.rms_history
            .iter()
            .map(|x| format!("{x:?}\n"))
            .collect::<String>()
    };
    let a = history_csv() == history_csv();
    let b = sweep_csv(1) == sweep_csv(1) && sweep_csv(1) == sweep_csv(3);
    let c = mlp_csv() == mlp_csv();
    outcome(
        a && b && c,
        format!("training history identical {a}; sweep identical across runs and thread counts {b}; baseline identical {c}"),
    )
}

fn main() -> ExitCode {
    let trained = Trained::run();
    assert_eq!(
        trained.report.status,
        TrainStatus::Converged,
        "default training must converge"
    );
    let (c2, qnn_test_rms) = criterion_2(&trained);
    let results = [
        (1, "training-set fit from zero init", criterion_1(&trained)),
        (2, "test-set generalization", c2),
        (3, "Initial column", criterion_3()),
        (4, "Closed-form solution", criterion_4()),
        (5, "Evolution engine", criterion_5()),
        (6, "Gradient correctness", criterion_6()),
        (7, "Oracle suite", criterion_7()),
        (8, "Target sweep", criterion_8()),
        (9, "Baseline contrast", criterion_9(qnn_test_rms)),
        (10, "Determinism", criterion_10()),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        println!(
            "criterion {n:>2} {} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
