//! The acceptance battery: eleven end-to-end checks of the constants, the
//! proof chain and the experiments, each with its own tolerance.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{f_bound, schur_constant, sharp_constant, Exponent, P_GRID};
use crate::error::Result;
use crate::experiments::{
    epsilon_ratio, maximize_ratio, random_harmonic, ratio, SampleSpec, DEFAULT_BUDGET,
    EPSILON_SWEEP,
};
use crate::poisson::{mean_value_check, TrigPolynomial};
use crate::quadrature::DEFAULT_TOL;
use crate::schur::{
    f_from_r, f_second_derivative, f_x, f_y, pointwise_margin, run_proof, run_proof_with,
    symmetry_check, ProofGrid, ProofOptions, STRESS_THETAS,
};

/// Interior grid size shared by the grid-based criteria.
pub const GRID_POINTS: usize = 199;

/// Normalized ratios of the sharpness family at `eps = 0.01`, from an
/// extended-precision reference run.
pub const EPSILON_TERMINAL: [(f64, f64); 3] = [
    (1.25, 0.890_460_032_524_708),
    (2.0, 0.941_947_660_386_844_5),
    (4.0, 0.953_161_034_299_507_2),
];

pub const SHARPNESS_PS: [f64; 3] = [1.25, 2.0, 4.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// The measured quantity compared against `threshold`.
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CriterionOutcome {
    fn new(id: u8, name: &'static str, worst: f64, threshold: f64, passed: bool) -> Self {
        CriterionOutcome {
            id,
            name,
            passed,
            worst,
            threshold,
            detail: String::new(),
        }
    }

    fn failed(id: u8, name: &'static str, threshold: f64, err: &crate::Error) -> Self {
        CriterionOutcome {
            id,
            name,
            passed: false,
            worst: f64::NAN,
            threshold,
            detail: err.to_string(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// One-line summary, e.g. `[PASS]  5 schur pointwise margin ...`.
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "[{tag}] {:>2} {:<34} worst = {:.3e} (threshold {:e})",
            self.id, self.name, self.worst, self.threshold
        );
        if !self.detail.is_empty() {
            s.push_str("  ");
            s.push_str(&self.detail);
        }
        s
    }
}

fn exponents() -> Vec<Exponent> {
    P_GRID
        .iter()
        .map(|&p| Exponent::new(p).expect("grid exponent"))
        .collect()
}

fn interior_grid() -> Vec<f64> {
    (1..=GRID_POINTS)
        .map(|k| PI * k as f64 / (GRID_POINTS + 1) as f64)
        .collect()
}

/// Folds per-point results into the largest value, failing on the first error.
fn worst_of(values: Vec<Result<f64>>) -> Result<f64> {
    values
        .into_iter()
        .try_fold(f64::NEG_INFINITY, |m, v| v.map(|v| m.max(v)))
}

fn finish(
    id: u8,
    name: &'static str,
    threshold: f64,
    worst: Result<f64>,
    ok: impl Fn(f64) -> bool,
) -> CriterionOutcome {
    match worst {
        Ok(w) => CriterionOutcome::new(id, name, w, threshold, ok(w)),
        Err(e) => CriterionOutcome::failed(id, name, threshold, &e),
    }
}

pub fn sharp_constants() -> CriterionOutcome {
    let k2 = sharp_constant(Exponent::new(2.0).unwrap());
    let k15 = sharp_constant(Exponent::new(1.5).unwrap());
    let spot = (k2 - 1.0).abs().max((k15 - SQRT_2).abs());
    let rel = exponents()
        .into_iter()
        .map(|e| {
            let c = schur_constant(e);
            ((c - 2.0 * PI * sharp_constant(e)) / c).abs()
        })
        .fold(0.0, f64::max);
    CriterionOutcome::new(
        1,
        "sharp constant spot values",
        spot,
        1e-12,
        spot <= 1e-12 && rel <= 1e-14,
    )
    .with_detail(format!("C_p relative {rel:.1e}"))
}

pub fn endpoint_identity() -> CriterionOutcome {
    let worst = worst_of(
        exponents()
            .into_iter()
            .flat_map(|e| {
                [0.0, PI].map(move |t| f_x(e, t, DEFAULT_TOL).map(|v| (v.value - f_bound(e)).abs()))
            })
            .collect(),
    );
    finish(2, "endpoint beta identity", 1e-8, worst, |w| w <= 1e-8)
}

pub fn representation_equivalence() -> CriterionOutcome {
    let points: Vec<(Exponent, f64)> = exponents()
        .into_iter()
        .flat_map(|e| interior_grid().into_iter().map(move |t| (e, t)))
        .collect();
    let spreads: Vec<Result<f64>> = points
        .par_iter()
        .map(|&(e, t)| {
            let x = f_x(e, t, DEFAULT_TOL)?.value;
            let y = f_y(e, t, DEFAULT_TOL)?.value;
            let r = f_from_r(e, t, DEFAULT_TOL)?.value;
            Ok((x - y).abs().max((x - r).abs()))
        })
        .collect();
    finish(
        3,
        "representation equivalence",
        1e-7,
        worst_of(spreads),
        |w| w <= 1e-7,
    )
}

pub fn convexity() -> CriterionOutcome {
    const NAME: &str = "convexity of F";
    let grid_points: Vec<(Exponent, f64)> = exponents()
        .into_iter()
        .flat_map(|e| interior_grid().into_iter().map(move |t| (e, t)))
        .collect();
    let min_f2 = grid_points
        .par_iter()
        .map(|&(e, t)| f_second_derivative(e, t, DEFAULT_TOL).map(|r| r.value))
        .collect::<Vec<_>>()
        .into_iter()
        .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)));
    let min_f2 = match min_f2 {
        Ok(v) => v,
        Err(e) => return CriterionOutcome::failed(4, NAME, 1e-3, &e),
    };

    let d = 1e-3;
    let spots: Vec<(Exponent, f64)> = exponents()
        .into_iter()
        .flat_map(|e| (1..=20).map(move |k| (e, PI * k as f64 / 21.0)))
        .collect();
    let rel: Vec<Result<f64>> = spots
        .par_iter()
        .map(|&(e, t)| {
            let fx = |t: f64| f_x(e, t, 1e-13).map(|r| r.value);
            let fd = (fx(t + d)? - 2.0 * fx(t)? + fx(t - d)?) / (d * d);
            let f2 = f_second_derivative(e, t, DEFAULT_TOL)?.value;
            Ok(((f2 - fd) / f2).abs())
        })
        .collect();
    match worst_of(rel) {
        Ok(w) => CriterionOutcome::new(4, NAME, w, 1e-3, min_f2 > 0.0 && w <= 1e-3)
            .with_detail(format!("min F'' = {min_f2:.3e}")),
        Err(e) => CriterionOutcome::failed(4, NAME, 1e-3, &e),
    }
}

pub fn schur_pointwise() -> CriterionOutcome {
    let mut thetas = interior_grid();
    thetas.extend(STRESS_THETAS);
    let points: Vec<(Exponent, f64)> = exponents()
        .into_iter()
        .flat_map(|e| thetas.clone().into_iter().map(move |t| (e, t)))
        .collect();
    let margins: Vec<Result<f64>> = points
        .par_iter()
        .map(|&(e, t)| pointwise_margin(e, t, DEFAULT_TOL).map(|m| -m))
        .collect();
    // reported as the smallest margin
    match worst_of(margins) {
        Ok(neg) => CriterionOutcome::new(5, "schur pointwise margin", -neg, -1e-8, -neg >= -1e-8),
        Err(e) => CriterionOutcome::failed(5, "schur pointwise margin", -1e-8, &e),
    }
}

pub fn certificate_identity() -> CriterionOutcome {
    let rs = [0.0, 0.25, -0.25, 0.5, -0.5, 0.75, -0.75, 0.9, -0.9];
    let residuals: Vec<Result<f64>> = exponents()
        .into_iter()
        .flat_map(|e| rs.map(move |r| mean_value_check(e, r, DEFAULT_TOL).map(f64::abs)))
        .collect();
    finish(
        6,
        "certificate mean value identity",
        1e-8,
        worst_of(residuals),
        |w| w <= 1e-8,
    )
}

/// Twenty `(p, theta)` pairs drawn from a fixed seed, `p` log-uniform on the grid range.
pub fn symmetry_points() -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (lo, hi) = (P_GRID[0].ln(), P_GRID[P_GRID.len() - 1].ln());
    (0..20)
        .map(|_| {
            let p = rng.random_range(lo..hi).exp();
            let t = rng.random_range(0.0..PI);
            (p, t)
        })
        .collect()
}

pub fn symmetry_reduction() -> CriterionOutcome {
    let residuals: Vec<Result<f64>> = symmetry_points()
        .into_iter()
        .map(|(p, t)| symmetry_check(Exponent::new(p)?, t, DEFAULT_TOL))
        .collect();
    finish(7, "symmetry reduction", 1e-9, worst_of(residuals), |w| {
        w <= 1e-9
    })
}

pub fn random_functions() -> CriterionOutcome {
    const NAME: &str = "inequality on random functions";
    let e2 = Exponent::new(2.0).unwrap();
    let closed: [(TrigPolynomial, f64); 3] = [
        (TrigPolynomial::constant(1.0), 1.0 / PI),
        (TrigPolynomial::cos_mode(1), 2.0 / (3.0 * PI)),
        (TrigPolynomial::cos_mode(2), 2.0 / (5.0 * PI)),
    ];
    let closed_err = worst_of(
        closed
            .iter()
            .map(|(f, want)| ratio(e2, f, DEFAULT_TOL).map(|r| (r.normalized - want).abs()))
            .collect(),
    );
    let closed_err = match closed_err {
        Ok(v) => v,
        Err(e) => return CriterionOutcome::failed(8, NAME, 1.0 + 1e-8, &e),
    };

    let spec = SampleSpec::default();
    let points: Vec<(Exponent, usize)> = exponents()
        .into_iter()
        .flat_map(|e| (0..spec.count).map(move |i| (e, i)))
        .collect();
    let worst = worst_of(
        points
            .par_iter()
            .map(|&(e, i)| ratio(e, &random_harmonic(&spec, i)?, DEFAULT_TOL).map(|r| r.normalized))
            .collect(),
    );
    match worst {
        Ok(w) => CriterionOutcome::new(
            8,
            NAME,
            w,
            1.0 + 1e-8,
            w <= 1.0 + 1e-8 && closed_err <= 1e-10,
        )
        .with_detail(format!(
            "{} samples, closed forms off by {closed_err:.1e}",
            points.len()
        )),
        Err(e) => CriterionOutcome::failed(8, NAME, 1.0 + 1e-8, &e),
    }
}

pub fn sharpness_probe() -> CriterionOutcome {
    const NAME: &str = "sharpness probe";
    let mut worst = f64::NEG_INFINITY;
    let mut monotone = true;
    let mut pin_err: f64 = 0.0;
    for (&p, &(pin_p, pin)) in SHARPNESS_PS.iter().zip(&EPSILON_TERMINAL) {
        debug_assert_eq!(p, pin_p);
        let e = Exponent::new(p).unwrap();
        let values: Result<Vec<f64>> = EPSILON_SWEEP
            .iter()
            .map(|&eps| epsilon_ratio(e, eps, DEFAULT_TOL).map(|r| r.normalized))
            .collect();
        let values = match values {
            Ok(v) => v,
            Err(err) => return CriterionOutcome::failed(9, NAME, 1.0 + 1e-8, &err),
        };
        monotone &= values.windows(2).all(|w| w[1] > w[0]);
        worst = values.iter().copied().fold(worst, f64::max);
        pin_err = pin_err.max((values[values.len() - 1] - pin).abs());
    }
    CriterionOutcome::new(
        9,
        NAME,
        worst,
        1.0 + 1e-8,
        monotone && worst <= 1.0 + 1e-8 && pin_err <= 1e-8,
    )
    .with_detail(format!("monotone = {monotone}, pin off by {pin_err:.1e}"))
}

pub fn optimizer_safety() -> CriterionOutcome {
    const NAME: &str = "optimizer safety";
    let runs: Vec<(f64, u64)> = SHARPNESS_PS
        .iter()
        .flat_map(|&p| (0..10u64).map(move |s| (p, s)))
        .collect();
    let best = worst_of(
        runs.par_iter()
            .map(|&(p, seed)| {
                maximize_ratio(Exponent::new(p)?, 8, DEFAULT_BUDGET, seed, DEFAULT_TOL)
                    .map(|r| r.best.normalized)
            })
            .collect(),
    );
    finish(10, NAME, 1.0 + 1e-6, best, |w| w <= 1.0 + 1e-6)
}

pub fn falsifiability() -> CriterionOutcome {
    const NAME: &str = "falsifiability control";
    let reduced = ProofOptions {
        cp_scale: 0.99,
        ..Default::default()
    };
    let mut caught = 0;
    let mut baseline_ok = true;
    for e in exponents() {
        let grid = ProofGrid::default_for(e);
        baseline_ok &= run_proof(&grid).passed;
        if !run_proof_with(&grid, &reduced).passed {
            caught += 1;
        }
    }
    let total = P_GRID.len();
    CriterionOutcome::new(
        11,
        NAME,
        (total - caught) as f64,
        0.0,
        caught == total && baseline_ok,
    )
    .with_detail(format!(
        "reduced constant rejected for {caught}/{total} exponents, unmodified run passed = {baseline_ok}"
    ))
}

/// Criterion functions in order.
pub const CRITERIA: [fn() -> CriterionOutcome; 11] = [
    sharp_constants,
    endpoint_identity,
    representation_equivalence,
    convexity,
    schur_pointwise,
    certificate_identity,
    symmetry_reduction,
    random_functions,
    sharpness_probe,
    optimizer_safety,
    falsifiability,
];

pub fn run_all() -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|c| c()).collect()
}
