//! One pipeline per subcommand, each producing a flat [`Report`].

use std::f64::consts::PI;

use rayon::prelude::*;

use hardy_sharp::experiments::{epsilon_ratio, maximize_ratio, random_harmonic, ratio, SampleSpec};
use hardy_sharp::schur::{f_second_derivative, f_x, run_proof_with, ProofGrid, ProofOptions};
use hardy_sharp::selftest::run_all;
use hardy_sharp::{constants::f_bound, Exponent, SharpConstants};

use crate::report::{Cell, Report};
use crate::RunConfig;

const INEQUALITY_SLACK: f64 = 1e-8;
const OPTIMIZER_SLACK: f64 = 1e-6;
const FD_STEP: f64 = 1e-3;

fn exponents(config: &RunConfig) -> Vec<Exponent> {
    config
        .p_grid
        .iter()
        .map(|&p| Exponent::new(p).expect("validated exponent"))
        .collect()
}

fn theta_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| PI * k as f64 / (n + 1) as f64).collect()
}

pub fn constants(config: &RunConfig) -> Report {
    let mut report = Report::new(&["p", "kp", "cp", "bp"]);
    for e in exponents(config) {
        let c = SharpConstants::new(e);
        report.push(vec![c.p.into(), c.kp.into(), c.cp.into(), c.bp.into()], 0.0);
    }
    report
}

pub fn schur(config: &RunConfig) -> Report {
    let mut report = Report::new(&["p", "theta", "lhs", "rhs", "margin", "err"]);
    let opts = ProofOptions {
        cp_scale: config.cp_scale,
        ..Default::default()
    };
    for e in exponents(config) {
        let grid = ProofGrid::uniform(e, config.theta_grid, config.tol).expect("validated grid");
        let proof = run_proof_with(&grid, &opts);
        for row in &proof.rows {
            if let Some(msg) = &row.failure {
                eprintln!("p = {}, theta = {:.6}: {msg}", e.p(), row.theta);
            }
            if row.theta == 0.0 || row.theta == PI {
                continue;
            }
            report.push(
                vec![
                    e.p().into(),
                    row.theta.into(),
                    row.lhs.into(),
                    row.rhs.into(),
                    (row.rhs - row.lhs).into(),
                    row.error_estimate.into(),
                ],
                row.error_estimate,
            );
        }
        report.margin(proof.worst_margin);
        for _ in 0..proof.numerical_failures {
            report.numerical_failure();
        }
        if !proof.passed {
            report.fail();
        }
    }
    report
}

pub fn convexity(config: &RunConfig) -> Report {
    let mut report = Report::new(&["p", "theta", "f2_phi", "f2_fd", "rel_diff"]);
    let points: Vec<(Exponent, f64)> = exponents(config)
        .into_iter()
        .flat_map(|e| {
            theta_grid(config.theta_grid)
                .into_iter()
                .map(move |t| (e, t))
        })
        .collect();
    let fd_tol = config.tol.min(1e-13);
    let rows: Vec<_> = points
        .par_iter()
        .map(|&(e, t)| {
            let d = FD_STEP.min(0.5 * t).min(0.5 * (PI - t));
            let f2 = f_second_derivative(e, t, config.tol)?;
            let fx = |t: f64| f_x(e, t, fd_tol).map(|r| r.value);
            let fd = (fx(t + d)? - 2.0 * fx(t)? + fx(t - d)?) / (d * d);
            Ok::<_, hardy_sharp::Error>((f2, fd))
        })
        .collect();
    for (&(e, t), row) in points.iter().zip(rows) {
        match row {
            Ok((f2, fd)) => {
                report.push(
                    vec![
                        e.p().into(),
                        t.into(),
                        f2.value.into(),
                        fd.into(),
                        ((f2.value - fd) / f2.value).abs().into(),
                    ],
                    f2.error_estimate,
                );
                report.margin(f2.value);
                if !(f2.value > 0.0) {
                    report.fail();
                }
            }
            Err(err) => {
                eprintln!("p = {}, theta = {t:.6}: {err}", e.p());
                report.push(
                    vec![
                        e.p().into(),
                        t.into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                    ],
                    f64::NAN,
                );
                report.numerical_failure();
            }
        }
    }
    report
}

pub fn endpoints(config: &RunConfig) -> Report {
    let mut report = Report::new(&["p", "theta", "f_x", "f_bound", "residual", "err"]);
    for e in exponents(config) {
        let bound = f_bound(e);
        for theta in [0.0, PI] {
            match f_x(e, theta, config.tol) {
                Ok(fx) => {
                    let residual = fx.value - bound;
                    report.push(
                        vec![
                            e.p().into(),
                            theta.into(),
                            fx.value.into(),
                            bound.into(),
                            residual.into(),
                            fx.error_estimate.into(),
                        ],
                        fx.error_estimate,
                    );
                    report.margin(-residual.abs());
                    if residual.abs() > INEQUALITY_SLACK {
                        report.fail();
                    }
                }
                Err(err) => {
                    eprintln!("p = {}, theta = {theta}: {err}", e.p());
                    report.numerical_failure();
                }
            }
        }
    }
    report
}

pub fn ratio_sweep(config: &RunConfig) -> Report {
    let mut report = Report::new(&["p", "sample", "lhs", "rhs_raw", "normalized"]);
    let spec = SampleSpec {
        degree: config.degree,
        count: config.samples,
        seed: config.seed,
        decay: config.decay,
    };
    let points: Vec<(Exponent, usize)> = exponents(config)
        .into_iter()
        .flat_map(|e| (0..spec.count).map(move |i| (e, i)))
        .collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(e, i)| ratio(e, &random_harmonic(&spec, i)?, config.tol))
        .collect();
    for (&(e, i), res) in points.iter().zip(results) {
        match res {
            Ok(r) => {
                report.push(
                    vec![
                        e.p().into(),
                        i.into(),
                        r.lhs.into(),
                        r.rhs_raw.into(),
                        r.normalized.into(),
                    ],
                    r.error_estimate,
                );
                report.margin(1.0 - r.normalized);
                if r.normalized > 1.0 + INEQUALITY_SLACK {
                    report.fail();
                }
            }
            Err(err) => {
                eprintln!("p = {}, sample {i}: {err}", e.p());
                report.numerical_failure();
            }
        }
    }
    report
}

pub fn epsilon_sweep(config: &RunConfig) -> Report {
    let mut report = Report::new(&["p", "eps", "normalized"]);
    for e in exponents(config) {
        let mut previous = f64::NEG_INFINITY;
        for &eps in &config.eps {
            match epsilon_ratio(e, eps, config.tol) {
                Ok(r) => {
                    report.push(
                        vec![e.p().into(), eps.into(), r.normalized.into()],
                        r.error_estimate,
                    );
                    report.margin(1.0 - r.normalized);
                    // eps is sorted downwards, so the ratio must climb
                    if r.normalized > 1.0 + INEQUALITY_SLACK || r.normalized <= previous {
                        report.fail();
                    }
                    previous = r.normalized;
                }
                Err(err) => {
                    eprintln!("p = {}, eps = {eps}: {err}", e.p());
                    report.numerical_failure();
                }
            }
        }
    }
    report
}

pub fn maximize(config: &RunConfig) -> Report {
    let mut report = Report::new(&["p", "seed", "evaluations", "best_normalized"]);
    let runs: Vec<(Exponent, u64)> = exponents(config)
        .into_iter()
        .flat_map(|e| (0..config.restarts).map(move |k| (e, config.seed.wrapping_add(k))))
        .collect();
    let results: Vec<_> = runs
        .par_iter()
        .map(|&(e, seed)| maximize_ratio(e, config.degree, config.budget, seed, config.tol))
        .collect();
    for (&(e, seed), res) in runs.iter().zip(results) {
        match res {
            Ok(r) => {
                report.push(
                    vec![
                        e.p().into(),
                        seed.into(),
                        r.evaluations.into(),
                        r.best.normalized.into(),
                    ],
                    r.best.error_estimate,
                );
                report.margin(1.0 - r.best.normalized);
                if r.best.normalized > 1.0 + OPTIMIZER_SLACK {
                    report.fail();
                }
            }
            Err(err) => {
                eprintln!("p = {}, seed {seed}: {err}", e.p());
                report.numerical_failure();
            }
        }
    }
    report
}

pub fn selftest() -> Report {
    let mut report = Report::new(&["id", "name", "passed", "worst", "threshold", "detail"]);
    for outcome in run_all() {
        eprintln!("{}", outcome.line());
        if !outcome.passed {
            if outcome.worst.is_nan() {
                report.numerical_failure();
            } else {
                report.fail();
            }
        }
        report.push(
            vec![
                Cell::Int(outcome.id.into()),
                outcome.name.into(),
                outcome.passed.into(),
                outcome.worst.into(),
                outcome.threshold.into(),
                outcome.detail.into(),
            ],
            0.0,
        );
    }
    report
}
