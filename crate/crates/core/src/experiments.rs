//! Empirical probes of the inequality beyond the proof.
//!
//! Three probes live here: the normalized ratio
//! `int_{-1}^{1} |f|^p dr / (K_p int_0^{2 pi} |f*|^p d theta)` on random
//! trigonometric polynomials, the family `Re (1 - z^2)^(-(1/p) + eps)` that
//! pushes the ratio toward one as `eps -> 0`, and a Nelder-Mead search for
//! large ratios.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{sharp_constant, Exponent};
use crate::error::{Error, Result};
use crate::poisson::{BoundaryFunction, Certificate, DiameterPower, TrigPolynomial};
use crate::quadrature::{Integrand, Quadrature, SingularityHint};

/// Sign-scan resolution used to find zeros before integrating `|f|^p`.
pub const SCAN_POINTS: usize = 4096;

/// The default sharpness sweep, from far to near the critical exponent.
pub const EPSILON_SWEEP: [f64; 5] = [0.2, 0.1, 0.05, 0.02, 0.01];

pub const DEFAULT_BUDGET: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub degree: usize,
    pub count: usize,
    pub seed: u64,
    /// Coefficients of order `n` are scaled by `(1 + n)^(-decay)`.
    pub decay: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            degree: 8,
            count: 1000,
            seed: 42,
            decay: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioResult {
    pub lhs: f64,
    pub rhs_raw: f64,
    pub ratio: f64,
    pub normalized: f64,
    pub error_estimate: f64,
}

impl RatioResult {
    fn new(e: Exponent, lhs: f64, rhs_raw: f64, error_estimate: f64) -> Self {
        let ratio = lhs / rhs_raw;
        RatioResult {
            lhs,
            rhs_raw,
            ratio,
            normalized: ratio / sharp_constant(e),
            error_estimate,
        }
    }
}

/// The `index`-th sample of `spec`. Each index owns its own ChaCha stream, so
/// samples can be drawn in any order.
pub fn random_harmonic(spec: &SampleSpec, index: usize) -> Result<TrigPolynomial> {
    if index >= spec.count {
        return Err(Error::domain("index", index as f64, "[0, count)"));
    }
    if !(spec.decay >= 0.0) {
        return Err(Error::domain("decay", spec.decay, "[0, inf)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let mut draw = |n: usize| -> f64 {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * (1.0 + n as f64).powf(-spec.decay)
    };
    let a0 = draw(0);
    let mut cos_coeffs = Vec::with_capacity(spec.degree);
    let mut sin_coeffs = Vec::with_capacity(spec.degree);
    for n in 1..=spec.degree {
        cos_coeffs.push(draw(n));
        sin_coeffs.push(draw(n));
    }
    TrigPolynomial::new(a0, cos_coeffs, sin_coeffs)
}

/// Sign changes of `f` on `[a, b]`, refined by bisection.
fn sign_changes(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Vec<f64> {
    let h = (b - a) / SCAN_POINTS as f64;
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut f0 = f(a);
    for i in 1..=SCAN_POINTS {
        let x1 = if i == SCAN_POINTS {
            b
        } else {
            a + h * i as f64
        };
        let f1 = f(x1);
        if f0 == 0.0 {
            if x0 > a {
                roots.push(x0);
            }
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

struct AbsPow<F> {
    f: F,
    p: f64,
}

impl<F: Fn(f64) -> f64> Integrand for AbsPow<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x).abs().powf(self.p)
    }
}

/// The extension of `f` along the diameter through `e^{is}`, parametrized by
/// `r in [-1, 1]`.
pub fn on_segment(f: &TrigPolynomial, r: f64, s: f64) -> f64 {
    if s == 0.0 {
        f.on_diameter(r)
    } else if r >= 0.0 {
        f.extension(r, s)
    } else {
        f.extension(-r, s + PI)
    }
}

/// Normalized ratio along the real diameter.
pub fn ratio(e: Exponent, f: &TrigPolynomial, tol: f64) -> Result<RatioResult> {
    ratio_along(e, f, 0.0, tol)
}

/// Normalized ratio along the diameter through `e^{is}`.
///
/// `f` is rescaled to unit maximum coefficient before integrating, so the
/// tolerance acts relative to the size of `f` and the result is invariant
/// under `f -> c f`.
pub fn ratio_along(e: Exponent, f: &TrigPolynomial, s: f64, tol: f64) -> Result<RatioResult> {
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let size = f.to_vec().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let unit = f.scaled(1.0 / size);
    let p = e.p();
    let quad = Quadrature::with_tol(tol);

    let seg = |r: f64| on_segment(&unit, r, s);
    let splits: Vec<SingularityHint> = sign_changes(seg, -1.0, 1.0)
        .into_iter()
        .map(SingularityHint::split)
        .collect();
    let lhs = quad.integrate(&AbsPow { f: seg, p }, -1.0, 1.0, &splits)?;

    let bdry = |t: f64| unit.value(t);
    let splits: Vec<SingularityHint> = sign_changes(bdry, 0.0, TAU)
        .into_iter()
        .map(SingularityHint::split)
        .collect();
    let rhs = quad.integrate(&AbsPow { f: bdry, p }, 0.0, TAU, &splits)?;
    if !(rhs.value > 0.0) {
        return Err(Error::ZeroFunction);
    }

    let scale = size.powf(p);
    Ok(RatioResult::new(
        e,
        lhs.value * scale,
        rhs.value * scale,
        lhs.error_estimate / rhs.value + lhs.value * rhs.error_estimate / (rhs.value * rhs.value),
    ))
}

struct CertificatePower {
    cert: Certificate,
    p: f64,
}

impl Integrand for CertificatePower {
    fn eval(&self, t: f64) -> f64 {
        self.cert.value(t).abs().powf(self.p)
    }

    fn eval_offset(&self, anchor: f64, offset: f64) -> f64 {
        self.cert.value_at(anchor, offset).abs().powf(self.p)
    }
}

/// Ratio for `f_eps = Re (1 - z^2)^(-(1/p) + eps)`, `0 < eps < 1/p`.
pub fn epsilon_ratio(e: Exponent, eps: f64, tol: f64) -> Result<RatioResult> {
    if !(eps > 0.0 && eps < e.inv_p()) {
        return Err(Error::domain("eps", eps, "(0, 1/p)"));
    }
    let p = e.p();
    let q = e.inv_p() - eps;
    let quad = Quadrature::with_tol(tol);

    let interior = DiameterPower { exponent: -q * p };
    let lhs = quad.integrate(&interior, -1.0, 1.0, &interior.hints())?;

    let cert = Certificate::new(q)?;
    let hints: Vec<SingularityHint> = [0.0, PI, TAU]
        .into_iter()
        .map(|x| SingularityHint::new(x, -q * p))
        .collect();
    let rhs = quad.integrate(&CertificatePower { cert, p }, 0.0, TAU, &hints)?;

    Ok(RatioResult::new(
        e,
        lhs.value,
        rhs.value,
        lhs.error_estimate / rhs.value + lhs.value * rhs.error_estimate / (rhs.value * rhs.value),
    ))
}

/// Ratios for samples `0..spec.count`, computed in parallel.
pub fn ratio_sweep(e: Exponent, spec: &SampleSpec, tol: f64) -> Vec<Result<RatioResult>> {
    (0..spec.count)
        .into_par_iter()
        .map(|i| ratio(e, &random_harmonic(spec, i)?, tol))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizeResult {
    pub best: RatioResult,
    pub argmax: TrigPolynomial,
    pub evaluations: usize,
    pub budget_exhausted: bool,
    /// Iterates rejected because the ratio could not be computed.
    pub rejected: usize,
}

const NM_REFLECT: f64 = 1.0;
const NM_EXPAND: f64 = 2.0;
const NM_CONTRACT: f64 = 0.5;
const NM_SHRINK: f64 = 0.5;

struct Objective {
    e: Exponent,
    tol: f64,
    budget: usize,
    evaluations: usize,
    rejected: usize,
    best: Option<(RatioResult, Vec<f64>)>,
}

impl Objective {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    /// Negated normalized ratio at the projection of `x`; `+inf` on rejection.
    fn cost(&mut self, x: &mut [f64]) -> f64 {
        self.evaluations += 1;
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            self.rejected += 1;
            return f64::INFINITY;
        }
        x.iter_mut().for_each(|v| *v /= norm);
        let outcome = TrigPolynomial::from_slice(x).and_then(|f| ratio(self.e, &f, self.tol));
        match outcome {
            Ok(r) => {
                if self
                    .best
                    .as_ref()
                    .is_none_or(|(b, _)| r.normalized > b.normalized)
                {
                    self.best = Some((r, x.to_vec()));
                }
                -r.normalized
            }
            Err(_) => {
                self.rejected += 1;
                f64::INFINITY
            }
        }
    }
}

fn towards(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

/// Nelder-Mead search for the largest normalized ratio over trigonometric
/// polynomials of the given degree. Deterministic in `seed`.
pub fn maximize_ratio(
    e: Exponent,
    degree: usize,
    budget: usize,
    seed: u64,
    tol: f64,
) -> Result<MaximizeResult> {
    if degree < 1 {
        return Err(Error::domain("degree", degree as f64, "[1, inf)"));
    }
    if budget < 100 {
        return Err(Error::domain("budget", budget as f64, "[100, inf)"));
    }
    let dim = 2 * degree + 1;
    let start = random_harmonic(
        &SampleSpec {
            degree,
            count: 1,
            seed,
            decay: 0.0,
        },
        0,
    )?
    .to_vec();

    let mut obj = Objective {
        e,
        tol,
        budget,
        evaluations: 0,
        rejected: 0,
        best: None,
    };

    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dim + 1);
    for i in 0..=dim {
        let mut x = start.clone();
        if i > 0 {
            x[i - 1] += 0.5;
        }
        let c = obj.cost(&mut x);
        simplex.push((c, x));
    }

    while !obj.exhausted() {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (f_best, f_worst) = (simplex[0].0, simplex[dim].0);
        if f_best.is_finite() && f_worst - f_best <= 1e-13 * f_best.abs().max(1.0) {
            break;
        }
        let f_second = simplex[dim - 1].0;

        let mut centroid = vec![0.0; dim];
        for (_, x) in &simplex[..dim] {
            centroid
                .iter_mut()
                .zip(x)
                .for_each(|(c, v)| *c += v / dim as f64);
        }
        let worst = simplex[dim].1.clone();

        let mut xr = towards(&centroid, &worst, -NM_REFLECT);
        let fr = obj.cost(&mut xr);
        if fr < f_best {
            if obj.exhausted() {
                simplex[dim] = (fr, xr);
                break;
            }
            let mut xe = towards(&centroid, &xr, NM_EXPAND);
            let fe = obj.cost(&mut xe);
            simplex[dim] = if fe < fr { (fe, xe) } else { (fr, xr) };
            continue;
        }
        if fr < f_second {
            simplex[dim] = (fr, xr);
            continue;
        }
        if obj.exhausted() {
            break;
        }
        let (mut xc, bar) = if fr < f_worst {
            (towards(&centroid, &xr, NM_CONTRACT), fr)
        } else {
            (towards(&centroid, &worst, NM_CONTRACT), f_worst)
        };
        let fc = obj.cost(&mut xc);
        if fc < bar {
            simplex[dim] = (fc, xc);
            continue;
        }
        let anchor = simplex[0].1.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if obj.exhausted() {
                break;
            }
            let mut x = towards(&anchor, &vertex.1, NM_SHRINK);
            let f = obj.cost(&mut x);
            *vertex = (f, x);
        }
    }

    let budget_exhausted = obj.exhausted();
    let (best, coeffs) = obj.best.ok_or(Error::ZeroFunction)?;
    Ok(MaximizeResult {
        best,
        argmax: TrigPolynomial::from_slice(&coeffs)?,
        evaluations: obj.evaluations,
        budget_exhausted,
        rejected: obj.rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::P_GRID;
    use proptest::prelude::*;

    const TOL: f64 = 1e-10;

    fn exp(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn closed_form_ratios() {
        let e = exp(2.0);
        let one = ratio(e, &TrigPolynomial::constant(1.0), TOL).unwrap();
        assert!((one.lhs - 2.0).abs() < 1e-12);
        assert!((one.rhs_raw - TAU).abs() < 1e-12);
        assert!((one.normalized - 1.0 / PI).abs() < 1e-12);

        let c1 = ratio(e, &TrigPolynomial::cos_mode(1), TOL).unwrap();
        assert!((c1.lhs - 2.0 / 3.0).abs() < 1e-12);
        assert!((c1.rhs_raw - PI).abs() < 1e-12);
        assert!((c1.normalized - 2.0 / (3.0 * PI)).abs() < 1e-12);

        let c2 = ratio(e, &TrigPolynomial::cos_mode(2), TOL).unwrap();
        assert!((c2.normalized - 2.0 / (5.0 * PI)).abs() < 1e-12);

        assert_eq!(
            ratio(e, &TrigPolynomial::constant(0.0), TOL),
            Err(Error::ZeroFunction)
        );
    }

    #[test]
    fn sin_mode_vanishes_on_the_real_diameter() {
        let f = TrigPolynomial::sin_mode(1);
        let r = ratio(exp(2.0), &f, TOL).unwrap();
        assert!(r.lhs.abs() < 1e-15);
        // along the imaginary axis it behaves like cos theta on the real one
        let r = ratio_along(exp(2.0), &f, PI / 2.0, TOL).unwrap();
        assert!((r.normalized - 2.0 / (3.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn odd_exponent_uses_zero_splits() {
        // |cos theta|^3: int_0^{2 pi} = 8/3, int_{-1}^{1} |r|^3 = 1/2
        let r = ratio(exp(3.0), &TrigPolynomial::cos_mode(1), TOL).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-12);
        assert!((r.rhs_raw - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = SampleSpec::default();
        let a = random_harmonic(&spec, 17).unwrap();
        assert_eq!(a, random_harmonic(&spec, 17).unwrap());
        assert_ne!(a, random_harmonic(&spec, 18).unwrap());
        assert_eq!(a.degree(), 8);
        let spec0 = SampleSpec { degree: 0, ..spec };
        let c = random_harmonic(&spec0, 3).unwrap();
        assert_eq!(c.degree(), 0);
        assert!(c.a0 != 0.0);
        assert!(random_harmonic(&spec, 1000).is_err());

        let flat = SampleSpec { decay: 0.0, ..spec };
        let v = random_harmonic(&flat, 0).unwrap().to_vec();
        assert_eq!(v.len(), 17);
        assert!(v.iter().all(|&c| c != 0.0));
    }

    #[test]
    fn random_samples_respect_the_bound() {
        let spec = SampleSpec {
            count: 40,
            ..Default::default()
        };
        for &p in &P_GRID {
            for r in ratio_sweep(exp(p), &spec, TOL) {
                let r = r.unwrap();
                assert!(r.normalized <= 1.0 + 1e-8, "p={p}: {}", r.normalized);
                assert!(r.normalized > 0.0);
            }
        }
    }

    #[test]
    fn epsilon_family_pins() {
        // extended-precision references
        let pins = [
            (2.0, 0.1, 0.649_938_227_063_435_4),
            (2.0, 0.01, 0.941_947_660_386_844_5),
            (1.25, 0.2, 0.331_194_586_261_450_6),
            (4.0, 0.01, 0.953_161_034_299_507_2),
        ];
        for (p, eps, want) in pins {
            let got = epsilon_ratio(exp(p), eps, TOL).unwrap().normalized;
            assert!((got - want).abs() < 1e-8, "p={p} eps={eps}: {got}");
        }
        assert!(epsilon_ratio(exp(2.0), 0.0, TOL).is_err());
        assert!(epsilon_ratio(exp(2.0), 0.5, TOL).is_err());
    }

    #[test]
    fn epsilon_family_degenerates_to_constant() {
        let e = exp(2.0);
        let near = epsilon_ratio(e, 0.5 - 1e-6, TOL).unwrap().normalized;
        assert!((near - 1.0 / PI).abs() < 1e-4);
    }

    #[test]
    fn epsilon_boundary_matches_complex_power() {
        // closed-form boundary values against Re (1 - z^2)^(-q) just inside the circle
        let q = 0.3;
        let cert = Certificate::new(q).unwrap();
        for &t in &[0.3, 1.2, 2.9, 4.0] {
            let z = num_complex::Complex64::from_polar(1.0 - 1e-9, t);
            let inside = crate::poisson::re_power_interior(q, z).unwrap();
            assert!((inside - cert.value(t)).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn optimizer_is_deterministic_and_bounded() {
        let e = exp(2.0);
        let a = maximize_ratio(e, 1, 300, 7, TOL).unwrap();
        let b = maximize_ratio(e, 1, 300, 7, TOL).unwrap();
        assert_eq!(a, b);
        assert!(a.evaluations <= 300);
        assert!(a.best.normalized <= 1.0 + 1e-6);
        // the best point must reproduce its recorded ratio
        let again = ratio(e, &a.argmax, TOL).unwrap();
        assert!((again.normalized - a.best.normalized).abs() < 1e-12);
        assert!(maximize_ratio(e, 0, 300, 7, TOL).is_err());
        assert!(maximize_ratio(e, 1, 99, 7, TOL).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn scale_invariance(idx in 0usize..1000, c in prop_oneof![-50.0..-1e-3f64, 1e-3..50.0f64], p in 1.05..16.0f64) {
            let f = random_harmonic(&SampleSpec::default(), idx).unwrap();
            let e = exp(p);
            let a = ratio(e, &f, TOL).unwrap().ratio;
            let b = ratio(e, &f.scaled(c), TOL).unwrap().ratio;
            prop_assert!((a - b).abs() <= 1e-10 * a.abs());
        }

        #[test]
        fn rotation_matches_segment_at_angle(idx in 0usize..1000, s in 0.0..TAU, p in 1.05..16.0f64) {
            let f = random_harmonic(&SampleSpec::default(), idx).unwrap();
            let e = exp(p);
            let rotated = ratio(e, &f.rotated(s), TOL).unwrap();
            let along = ratio_along(e, &f, s, TOL).unwrap();
            prop_assert!((rotated.normalized - along.normalized).abs() <= 1e-9 * along.normalized);
            prop_assert!(along.normalized <= 1.0 + 1e-8);
        }
    }
}
