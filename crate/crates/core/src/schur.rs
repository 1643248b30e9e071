//! Step-by-step numerical re-verification of the Schur-test argument.
//!
//! With `h = Re (1 - z^2)^(-1/p)`, `T h = (1 - r^2)^(-1/p)` on the diameter and
//!
//! ```text
//! T*((T h)^(p-1))(theta) = integral_{-1}^{1} (1 - r^2)^(1/p) / (1 - 2 r cos theta + r^2) dr
//! ```
//!
//! must stay below `C_p h(theta)^(p-1)`. After the substitutions
//! `(1 + r)/(1 - r) = y cot(theta/2)` and `x = arctan y` this reduces to
//! `F(theta) <= B_p`, where
//!
//! ```text
//! F(theta) = integral_0^{pi/2} sin^(1/p) x cos^(1/p) x / sin^(2/p)(x + theta/2) dx
//! ```
//!
//! is convex with `F(0) = F(pi) = B_p`. Every link of that chain is computed
//! here by its own quadrature so the links can be compared.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{f_bound, schur_constant, Exponent};
use crate::error::{Error, Result};
use crate::poisson::{adjoint_unchecked, DiameterPower};
use crate::quadrature::{Integrand, Quadrature, QuadratureResult, SingularityHint};

/// Absolute slack for every inequality check.
pub const SLACK: f64 = 1e-8;

/// Allowed disagreement between two representations of `F`.
pub const SPREAD_TOL: f64 = 1e-7;

/// Half-width of the excluded neighbourhoods of `0` and `pi` in the
/// convexity sweep; `F''` is infinite at both ends.
pub const CONVEXITY_MARGIN: f64 = 0.01;

/// Near-singular angles added to every default grid.
pub const STRESS_THETAS: [f64; 4] = [1e-3, 1e-2, PI - 1e-2, PI - 1e-3];

fn open_angle(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(Error::domain("theta", theta, "(0, pi)"))
    }
}

/// `(sin(theta/2), cos(theta/2))`, with `cos(pi/2) = 0` exactly.
fn half_angle(theta: f64) -> (f64, f64) {
    if theta > FRAC_PI_2 {
        let comp = 0.5 * (PI - theta);
        (comp.cos(), comp.sin())
    } else {
        (0.5 * theta).sin_cos()
    }
}

/// `(sin x, cos x)` for `x = anchor + offset` on `[0, pi/2]`.
#[inline]
fn quarter_parts(anchor: f64, offset: f64) -> (f64, f64) {
    if anchor == 0.0 {
        offset.sin_cos()
    } else if anchor == FRAC_PI_2 {
        let (s, c) = (-offset).sin_cos();
        (c, s)
    } else {
        (anchor + offset).sin_cos()
    }
}

/// `T*((T h)^(p-1))(theta)`.
pub fn lhs_schur(e: Exponent, theta: f64, tol: f64) -> Result<QuadratureResult> {
    open_angle(theta)?;
    lhs_schur_unchecked(e, theta, tol)
}

fn lhs_schur_unchecked(e: Exponent, theta: f64, tol: f64) -> Result<QuadratureResult> {
    let th_pow = DiameterPower {
        exponent: -e.conj_inv(),
    };
    adjoint_unchecked(&th_pow, theta, &th_pow.hints(), tol)
}

/// `C_p h(theta)^(p-1)` in closed form.
pub fn rhs_schur(e: Exponent, theta: f64) -> Result<f64> {
    open_angle(theta)?;
    Ok(rhs_with_constant(e, theta, schur_constant(e)))
}

fn rhs_with_constant(e: Exponent, theta: f64, cp: f64) -> f64 {
    let p = e.p();
    let q = e.conj_inv();
    cp * 2f64.powf(-q) * theta.sin().powf(-q) * (e.half_angle() - theta / p).cos().powf(p - 1.0)
}

/// `rhs_schur - lhs_schur`; non-negative on `(0, pi)` if the argument holds.
pub fn pointwise_margin(e: Exponent, theta: f64, tol: f64) -> Result<f64> {
    Ok(rhs_schur(e, theta)? - lhs_schur(e, theta, tol)?.value)
}

struct FxIntegrand {
    inv_p: f64,
    sh: f64,
    ch: f64,
}

impl Integrand for FxIntegrand {
    fn eval(&self, x: f64) -> f64 {
        self.eval_offset(x, 0.0)
    }

    fn eval_offset(&self, anchor: f64, offset: f64) -> f64 {
        let (s, c) = quarter_parts(anchor, offset);
        if self.sh == 0.0 {
            return (c / s).powf(self.inv_p);
        }
        if self.ch == 0.0 {
            return (s / c).powf(self.inv_p);
        }
        // sin(x + theta/2)
        let den = s * self.ch + c * self.sh;
        (s * c).powf(self.inv_p) / den.powf(2.0 * self.inv_p)
    }
}

/// Splits at the near-singular points of `sin(x + theta/2)^-k` on `[0, pi/2]`.
fn peak_splits(theta: f64) -> Vec<SingularityHint> {
    let mut out = Vec::new();
    let lo = 0.5 * theta;
    let hi = FRAC_PI_2 - 0.5 * (PI - theta);
    if lo > 0.0 && lo < FRAC_PI_4 {
        out.push(SingularityHint::split(lo));
    }
    if hi > FRAC_PI_4 && hi < FRAC_PI_2 {
        out.push(SingularityHint::split(hi));
    }
    out
}

/// `F(theta)` in the `x = arctan y` form, `theta` in `[0, pi]`.
pub fn f_x(e: Exponent, theta: f64, tol: f64) -> Result<QuadratureResult> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::domain("theta", theta, "[0, pi]"));
    }
    let inv_p = e.inv_p();
    let (sh, ch) = half_angle(theta);
    let mut hints = vec![
        SingularityHint::new(0.0, inv_p),
        SingularityHint::new(FRAC_PI_2, inv_p),
    ];
    if sh == 0.0 {
        hints.push(SingularityHint::new(0.0, -inv_p));
    }
    if ch == 0.0 {
        hints.push(SingularityHint::new(FRAC_PI_2, -inv_p));
    }
    hints.extend(peak_splits(theta));
    Ok(Quadrature::with_tol(tol).integrate(
        &FxIntegrand { inv_p, sh, ch },
        0.0,
        FRAC_PI_2,
        &hints,
    )?)
}

struct FyIntegrand {
    inv_p: f64,
    sh: f64,
    ch: f64,
}

impl Integrand for FyIntegrand {
    fn eval(&self, y: f64) -> f64 {
        y.powf(self.inv_p) / (y * y + 1.0) / (y * self.ch + self.sh).powf(2.0 * self.inv_p)
    }
}

/// `F(theta)` in the semi-infinite `y` form, `theta` in `[0, pi]`.
pub fn f_y(e: Exponent, theta: f64, tol: f64) -> Result<QuadratureResult> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::domain("theta", theta, "[0, pi]"));
    }
    let inv_p = e.inv_p();
    let (sh, ch) = half_angle(theta);
    let mut hints = Vec::new();
    if sh == 0.0 {
        hints.push(SingularityHint::new(0.0, -inv_p));
    } else {
        hints.push(SingularityHint::new(0.0, inv_p));
        if ch > 0.0 {
            let knee = sh / ch;
            if knee < 1.0 {
                hints.push(SingularityHint::split(knee));
            }
        }
    }
    let decay = if ch > 0.0 { 2.0 + inv_p } else { 2.0 - inv_p };
    hints.push(SingularityHint::tail(decay));
    Ok(
        Quadrature::with_tol(tol)
            .integrate_semi_infinite(&FyIntegrand { inv_p, sh, ch }, &hints)?,
    )
}

/// `F(theta)` recovered from the Schur left-hand side:
/// `2^(-1/p) sin^((p-1)/p)(theta) T*((T h)^(p-1))(theta)`.
pub fn f_from_r(e: Exponent, theta: f64, tol: f64) -> Result<QuadratureResult> {
    open_angle(theta)?;
    let factor = 2f64.powf(-e.inv_p()) * theta.sin().powf(e.conj_inv());
    Ok(lhs_schur(e, theta, tol / factor.max(1e-300))?.scale(factor))
}

fn phi_parts(inv_p: f64, s: f64, c: f64, sh: f64, ch: f64) -> f64 {
    let big_s = s * ch + c * sh;
    let big_c = c * ch - s * sh;
    let bracket = (1.0 + 2.0 * inv_p) * big_c * big_c + big_s * big_s;
    (s * c).powf(inv_p) / big_s.powf(2.0 + 2.0 * inv_p) * bracket
}

/// The second-derivative integrand
/// `sin^(1/p) x cos^(1/p) x / sin^(2+2/p)(x + theta/2) [(1 + 2/p) cos^2(x + theta/2) + sin^2(x + theta/2)]`.
pub fn phi(e: Exponent, x: f64, theta: f64) -> Result<f64> {
    if !(x > 0.0 && x < FRAC_PI_2) {
        return Err(Error::domain("x", x, "(0, pi/2)"));
    }
    open_angle(theta)?;
    let (s, c) = x.sin_cos();
    let (sh, ch) = half_angle(theta);
    Ok(phi_parts(e.inv_p(), s, c, sh, ch))
}

struct PhiIntegrand {
    inv_p: f64,
    sh: f64,
    ch: f64,
}

impl Integrand for PhiIntegrand {
    fn eval(&self, x: f64) -> f64 {
        self.eval_offset(x, 0.0)
    }

    fn eval_offset(&self, anchor: f64, offset: f64) -> f64 {
        let (s, c) = quarter_parts(anchor, offset);
        phi_parts(self.inv_p, s, c, self.sh, self.ch)
    }
}

/// `F''(theta) = (1/(2p)) integral_0^{pi/2} Phi(x, theta) dx` on the open interval.
pub fn f_second_derivative(e: Exponent, theta: f64, tol: f64) -> Result<QuadratureResult> {
    open_angle(theta)?;
    let inv_p = e.inv_p();
    let (sh, ch) = half_angle(theta);
    let mut hints = vec![
        SingularityHint::new(0.0, inv_p),
        SingularityHint::new(FRAC_PI_2, inv_p),
    ];
    hints.extend(peak_splits(theta));
    let scale = 0.5 * inv_p;
    let res = Quadrature::with_tol(tol / scale).integrate(
        &PhiIntegrand { inv_p, sh, ch },
        0.0,
        FRAC_PI_2,
        &hints,
    )?;
    Ok(res.scale(scale))
}

/// `|T*((T h)^(p-1))(theta + pi) with r -> -r  -  T*((T h)^(p-1))(theta)|`,
/// with the first term evaluated literally at the angle `theta + pi`.
pub fn symmetry_check(e: Exponent, theta: f64, tol: f64) -> Result<f64> {
    open_angle(theta)?;
    let shifted = lhs_schur_unchecked(e, theta + PI, tol)?;
    let direct = lhs_schur(e, theta, tol)?;
    Ok((shifted.value - direct.value).abs())
}

/// `(F_x(0) - B_p, F_x(pi) - B_p)`.
pub fn endpoint_check(e: Exponent, tol: f64) -> Result<(f64, f64)> {
    let bound = f_bound(e);
    Ok((
        f_x(e, 0.0, tol)?.value - bound,
        f_x(e, PI, tol)?.value - bound,
    ))
}

/// Angles in `(0, pi)` at which the argument is checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofGrid {
    thetas: Vec<f64>,
    p: Exponent,
    tol: f64,
}

impl ProofGrid {
    pub fn new(p: Exponent, mut thetas: Vec<f64>, tol: f64) -> Result<Self> {
        if let Some(&bad) = thetas.iter().find(|&&t| !(t > 0.0 && t < PI)) {
            return Err(Error::domain("theta", bad, "(0, pi)"));
        }
        if !(tol > 0.0) {
            return Err(Error::domain("tol", tol, "(0, inf)"));
        }
        thetas.sort_by(f64::total_cmp);
        thetas.dedup();
        Ok(ProofGrid { thetas, p, tol })
    }

    /// `n` equispaced interior points `pi k / (n + 1)` plus the stress set.
    pub fn uniform(p: Exponent, n: usize, tol: f64) -> Result<Self> {
        let mut thetas: Vec<f64> = (1..=n).map(|k| PI * k as f64 / (n + 1) as f64).collect();
        thetas.extend(STRESS_THETAS);
        Self::new(p, thetas, tol)
    }

    /// 199 points `pi k / 200` plus the stress set, `tol = 1e-10`.
    pub fn default_for(p: Exponent) -> Self {
        Self::uniform(p, 199, crate::quadrature::DEFAULT_TOL).expect("default grid is valid")
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

/// Knobs for [`run_proof_with`]. `cp_scale` multiplies the Schur constant and,
/// through `B_p = C_p cos^(p-1)(pi/2p) / 2`, the bound on `F`; values below
/// one must make the run fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProofOptions {
    pub slack: f64,
    pub spread_tol: f64,
    pub convexity_margin: f64,
    pub cp_scale: f64,
}

impl Default for ProofOptions {
    fn default() -> Self {
        ProofOptions {
            slack: SLACK,
            spread_tol: SPREAD_TOL,
            convexity_margin: CONVEXITY_MARGIN,
            cp_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofRow {
    pub theta: f64,
    /// `T*((T h)^(p-1))(theta)`; `NaN` at the endpoint rows.
    pub lhs: f64,
    /// `C_p h(theta)^(p-1)`; `NaN` at the endpoint rows.
    pub rhs: f64,
    /// `rhs - lhs`; the endpoint rows carry `B_p - F_x` instead.
    pub margin: f64,
    pub error_estimate: f64,
    pub f_x: f64,
    /// `max(|F_x - F_y|, |F_x - F_from_r|)`.
    pub spread: f64,
    /// `F''(theta)`, `NaN` where not evaluated.
    pub f2: f64,
    pub passed: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub p: f64,
    pub rows: Vec<ProofRow>,
    pub passed: bool,
    /// Smallest Schur or bound margin over all rows.
    pub worst_margin: f64,
    pub worst_spread: f64,
    pub min_f2: f64,
    /// Smallest slack in the discrete convexity of the sampled `F_x`.
    pub worst_convexity: f64,
    pub endpoint_residuals: (f64, f64),
    pub numerical_failures: usize,
}

impl VerificationReport {
    pub fn failing_rows(&self) -> impl Iterator<Item = &ProofRow> {
        self.rows.iter().filter(|r| !r.passed)
    }
}

/// Runs every check of the argument on `grid` with default options.
pub fn run_proof(grid: &ProofGrid) -> VerificationReport {
    run_proof_with(grid, &ProofOptions::default())
}

pub fn run_proof_with(grid: &ProofGrid, opts: &ProofOptions) -> VerificationReport {
    let e = grid.p;
    let tol = grid.tol;
    let cp = opts.cp_scale * schur_constant(e);
    let bound = opts.cp_scale * f_bound(e);

    let interior: Vec<ProofRow> = grid
        .thetas
        .par_iter()
        .map(|&theta| interior_row(e, theta, tol, cp, bound, opts))
        .collect();

    let endpoint = |theta: f64| -> ProofRow {
        match f_x(e, theta, tol) {
            Ok(fx) => {
                let margin = bound - fx.value;
                let residual = (fx.value - f_bound(e)).abs();
                let ok = margin >= -opts.slack && residual <= opts.slack;
                ProofRow {
                    theta,
                    lhs: f64::NAN,
                    rhs: f64::NAN,
                    margin,
                    error_estimate: fx.error_estimate,
                    f_x: fx.value,
                    spread: 0.0,
                    f2: f64::NAN,
                    passed: ok,
                    failure: (!ok).then(|| format!("endpoint F = {} vs bound {bound}", fx.value)),
                }
            }
            Err(err) => failed_row(theta, &err),
        }
    };
    let first = endpoint(0.0);
    let last = endpoint(PI);
    let endpoint_residuals = (first.f_x - f_bound(e), last.f_x - f_bound(e));

    let mut rows = Vec::with_capacity(interior.len() + 2);
    rows.push(first);
    rows.extend(interior);
    rows.push(last);

    // discrete convexity through every consecutive triple, endpoints included
    let mut worst_convexity = f64::INFINITY;
    for w in rows.windows(3) {
        let (t0, t1, t2) = (w[0].theta, w[1].theta, w[2].theta);
        let (f0, f1, f2) = (w[0].f_x, w[1].f_x, w[2].f_x);
        if f0.is_nan() || f1.is_nan() || f2.is_nan() {
            continue;
        }
        let chord = f0 + (f2 - f0) * (t1 - t0) / (t2 - t0);
        worst_convexity = worst_convexity.min(chord - f1);
    }
    let convex_ok = worst_convexity >= -opts.slack;

    let worst_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, nan_min);
    let worst_spread = rows.iter().map(|r| r.spread).fold(0.0, f64::max);
    let min_f2 = rows
        .iter()
        .map(|r| r.f2)
        .filter(|v| !v.is_nan())
        .fold(f64::INFINITY, f64::min);
    let numerical_failures = rows
        .iter()
        .filter(|r| r.f_x.is_nan() && r.failure.is_some())
        .count();
    let passed = convex_ok && rows.iter().all(|r| r.passed) && worst_margin >= -opts.slack;

    VerificationReport {
        p: e.p(),
        rows,
        passed,
        worst_margin,
        worst_spread,
        min_f2,
        worst_convexity,
        endpoint_residuals,
        numerical_failures,
    }
}

fn nan_min(acc: f64, v: f64) -> f64 {
    if v.is_nan() || acc.is_nan() {
        f64::NAN
    } else {
        acc.min(v)
    }
}

fn failed_row(theta: f64, err: &Error) -> ProofRow {
    ProofRow {
        theta,
        lhs: f64::NAN,
        rhs: f64::NAN,
        margin: f64::NAN,
        error_estimate: f64::NAN,
        f_x: f64::NAN,
        spread: f64::NAN,
        f2: f64::NAN,
        passed: false,
        failure: Some(err.to_string()),
    }
}

fn interior_row(
    e: Exponent,
    theta: f64,
    tol: f64,
    cp: f64,
    bound: f64,
    opts: &ProofOptions,
) -> ProofRow {
    let compute = || -> Result<ProofRow> {
        let lhs = lhs_schur(e, theta, tol)?;
        let rhs = rhs_with_constant(e, theta, cp);
        let fx = f_x(e, theta, tol)?;
        let fy = f_y(e, theta, tol)?;
        let fr = f_from_r(e, theta, tol)?;
        let spread = (fx.value - fy.value).abs().max((fx.value - fr.value).abs());
        let in_sweep = theta >= opts.convexity_margin && theta <= PI - opts.convexity_margin;
        let f2 = if in_sweep {
            f_second_derivative(e, theta, tol)?.value
        } else {
            f64::NAN
        };

        let margin = rhs - lhs.value;
        let bound_margin = bound - fx.value;
        // cos^(p-1)(pi/2p - theta/p) >= cos^(p-1)(pi/2p)
        let chain_ok = (e.half_angle() - theta / e.p()).cos() >= e.half_angle().cos();

        let mut failures = Vec::new();
        if margin < -opts.slack {
            failures.push(format!("schur margin {margin}"));
        }
        if bound_margin < -opts.slack {
            failures.push(format!("F = {} exceeds bound {bound}", fx.value));
        }
        if !(spread <= opts.spread_tol) {
            failures.push(format!("representation spread {spread}"));
        }
        if in_sweep && !(f2 > 0.0) {
            failures.push(format!("F'' = {f2}"));
        }
        if !chain_ok {
            failures.push("cosine factor below its endpoint value".to_string());
        }
        Ok(ProofRow {
            theta,
            lhs: lhs.value,
            rhs,
            margin: margin.min(bound_margin),
            error_estimate: lhs.error_estimate,
            f_x: fx.value,
            spread,
            f2,
            passed: failures.is_empty(),
            failure: (!failures.is_empty()).then(|| failures.join("; ")),
        })
    };
    compute().unwrap_or_else(|err| failed_row(theta, &err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::P_GRID;
    use crate::quadrature::integrate;

    const TOL: f64 = 1e-10;

    fn exp(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn lhs_spot_value() {
        // closed form pi (sqrt 2 - 1), confirmed in extended precision
        let v = lhs_schur(exp(2.0), FRAC_PI_2, TOL).unwrap();
        assert!((v.value - 1.301_290_284_568_573).abs() < 1e-10);
        assert!((v.value - PI * (2f64.sqrt() - 1.0)).abs() < 1e-10);
        assert!(lhs_schur(exp(2.0), 0.0, TOL).is_err());
        assert!(lhs_schur(exp(2.0), PI, TOL).is_err());
    }

    #[test]
    fn lhs_reflection_symmetry() {
        for &p in &[1.3, 2.0, 7.0] {
            for &t in &[0.2, 1.0, 1.4] {
                let a = lhs_schur(exp(p), t, TOL).unwrap().value;
                let b = lhs_schur(exp(p), PI - t, TOL).unwrap().value;
                assert!((a - b).abs() < 2e-10, "p={p} t={t}");
            }
        }
    }

    #[test]
    fn lhs_integrand_midpoint() {
        // at p = 2, theta = pi/2 the integrand at r = 0 is 1
        let g = DiameterPower { exponent: -0.5 };
        let k = crate::poisson::poisson_kernel(0.0, FRAC_PI_2).unwrap();
        assert_eq!(k * g.eval(0.0), 1.0);
    }

    #[test]
    fn rhs_closed_forms() {
        let want = 2.0 * PI * 2f64.powf(-0.5);
        assert!((rhs_schur(exp(2.0), FRAC_PI_2).unwrap() - want).abs() < 1e-13);
        // pi 2^(7/6), confirmed in extended precision
        assert!((rhs_schur(exp(1.5), FRAC_PI_2).unwrap() - 7.052_637_049_804_155_5).abs() < 1e-12);
        for &p in &P_GRID {
            let e = exp(p);
            for &t in &[0.01, 0.5, 1.7, 3.0] {
                let via_h =
                    schur_constant(e) * crate::poisson::h_boundary(e, t).unwrap().powf(p - 1.0);
                let direct = rhs_schur(e, t).unwrap();
                assert!(
                    (via_h - direct).abs() <= 1e-12 * direct.abs(),
                    "p={p} t={t}"
                );
            }
        }
        assert!(rhs_schur(exp(2.0), 0.0).is_err());
    }

    #[test]
    fn pointwise_margins() {
        assert!(pointwise_margin(exp(2.0), FRAC_PI_2, TOL).unwrap() >= 0.0);
        // extended-precision references
        let m = pointwise_margin(exp(1.1), 0.01, TOL).unwrap();
        assert!((m - 21.367_183_810_496_59).abs() < 1e-8, "{m}");
        let m = pointwise_margin(exp(16.0), PI - 0.01, TOL).unwrap();
        assert!((m - 0.485_870_021_574_646_1).abs() < 1e-8, "{m}");
    }

    #[test]
    fn f_representations_at_spot_points() {
        let e = exp(2.0);
        let b = PI / 2f64.sqrt();
        assert!((f_x(e, 0.0, TOL).unwrap().value - b).abs() < 1e-9);
        assert!((f_y(e, 0.0, TOL).unwrap().value - b).abs() < 1e-9);
        let fx = f_x(e, FRAC_PI_2, TOL).unwrap().value;
        assert!((fx - 0.920_151_184_510_610_1).abs() < 1e-10);
        assert!((f_y(e, FRAC_PI_2, TOL).unwrap().value - fx).abs() < 1e-9);
        assert!((f_from_r(e, FRAC_PI_2, TOL).unwrap().value - fx).abs() < 1e-9);

        let e4 = exp(4.0);
        let fx = f_x(e4, 0.1, TOL).unwrap().value;
        assert!((fx - 1.540_955_393_807_723_8).abs() < 1e-10);
        assert!((f_from_r(e4, 0.1, TOL).unwrap().value - fx).abs() < 1e-9);

        // theta = pi collapses the y-form denominator to 1
        for &p in &P_GRID {
            let e = exp(p);
            let direct = crate::quadrature::integrate_semi_infinite(
                &|y: f64| y.powf(1.0 / p) / (1.0 + y * y),
                TOL,
                &[SingularityHint::tail(2.0 - 1.0 / p)],
            )
            .unwrap()
            .value;
            assert!((f_y(e, PI, TOL).unwrap().value - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn endpoints_match_beta_identity() {
        for &p in &P_GRID {
            let e = exp(p);
            let (r0, rpi) = endpoint_check(e, TOL).unwrap();
            assert!(
                r0.abs() <= 10.0 * TOL && rpi.abs() <= 10.0 * TOL,
                "p={p}: {r0} {rpi}"
            );
            let half_beta = 0.5 * crate::constants::beta(0.5 - 0.5 / p, 0.5 + 0.5 / p).unwrap();
            assert!((f_x(e, 0.0, TOL).unwrap().value - half_beta).abs() < 1e-8);
        }
    }

    #[test]
    fn phi_values() {
        let v = phi(exp(2.0), FRAC_PI_4, FRAC_PI_2).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        for &p in &P_GRID {
            for &x in &[1e-6, 0.3, 1.2, FRAC_PI_2 - 1e-6] {
                for &t in &[1e-4, 1.0, PI - 1e-4] {
                    assert!(phi(exp(p), x, t).unwrap() > 0.0);
                    // bracket is a convex combination of 1 and 1 + 2/p
                    let (sh, ch) = half_angle(t);
                    let (s, c) = x.sin_cos();
                    let big_s: f64 = s * ch + c * sh;
                    let big_c: f64 = c * ch - s * sh;
                    let bracket = (1.0 + 2.0 / p) * big_c * big_c + big_s * big_s;
                    assert!(bracket >= 1.0 - 1e-15 && bracket <= 1.0 + 2.0 / p + 1e-15);
                }
            }
        }
        assert!(phi(exp(2.0), 0.0, 1.0).is_err());
        assert!(phi(exp(2.0), 1.0, PI).is_err());
    }

    #[test]
    fn second_derivative_against_finite_difference() {
        let e = exp(2.0);
        let v = f_second_derivative(e, FRAC_PI_2, TOL).unwrap().value;
        // extended-precision reference
        assert!((v - 0.325_322_571_142_143_25).abs() < 1e-10);
        let d = 1e-3;
        for &p in &[1.25, 2.0, 8.0] {
            let e = exp(p);
            for &t in &[0.4, 1.3, 2.6] {
                let fx = |t: f64| f_x(e, t, 1e-13).unwrap().value;
                let fd = (fx(t + d) - 2.0 * fx(t) + fx(t - d)) / (d * d);
                let f2 = f_second_derivative(e, t, TOL).unwrap().value;
                assert!(f2 > 0.0);
                assert!((f2 - fd).abs() <= 1e-3 * f2, "p={p} t={t}: {f2} vs {fd}");
            }
        }
        assert!(f_second_derivative(e, 0.0, TOL).is_err());
    }

    #[test]
    fn symmetry_residuals() {
        assert!(symmetry_check(exp(2.0), PI / 3.0, TOL).unwrap() <= 2.0 * TOL);
        assert!(symmetry_check(exp(1.2), 0.05, TOL).unwrap() <= 2.0 * TOL);
        let e = exp(8.0);
        assert!(symmetry_check(e, FRAC_PI_2, TOL).unwrap() <= 2.0 * TOL);
    }

    #[test]
    fn grid_validation() {
        let e = exp(2.0);
        assert!(ProofGrid::new(e, vec![0.0, 1.0], TOL).is_err());
        assert!(ProofGrid::new(e, vec![1.0, PI], TOL).is_err());
        let g = ProofGrid::new(e, vec![2.0, 1.0, 2.0], TOL).unwrap();
        assert_eq!(g.thetas(), &[1.0, 2.0]);
        let d = ProofGrid::default_for(e);
        assert_eq!(d.thetas().len(), 203);
        assert!(d.thetas().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn small_proof_runs_pass_and_scaled_constant_fails() {
        for &p in &[1.05, 2.0, 16.0] {
            let grid = ProofGrid::uniform(exp(p), 9, TOL).unwrap();
            let report = run_proof(&grid);
            assert!(report.passed, "p={p}: {:?}", report.failing_rows().next());
            assert_eq!(report.rows.len(), 9 + 4 + 2);
            assert!(report.worst_margin >= -SLACK);

            let low = ProofOptions {
                cp_scale: 0.99,
                ..Default::default()
            };
            assert!(!run_proof_with(&grid, &low).passed, "p={p}");
        }
    }

    #[test]
    fn y_form_by_substitution_matches_x_form() {
        // independent route: integrate the x-form through y = tan x directly
        let e = exp(3.0);
        let t: f64 = 1.1;
        let (sh, ch) = (0.5 * t).sin_cos();
        let via_tan = integrate(
            &|x: f64| {
                let y = x.tan();
                y.powf(1.0 / 3.0) / (y * ch + sh).powf(2.0 / 3.0)
            },
            0.0,
            FRAC_PI_2,
            TOL,
            &[SingularityHint::new(FRAC_PI_2, 1.0 / 3.0)],
        )
        .unwrap()
        .value;
        assert!((via_tan - f_y(e, t, TOL).unwrap().value).abs() < 1e-9);
    }
}
