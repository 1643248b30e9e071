//! The Poisson extension operator from the circle to the real diameter, its
//! adjoint, and the certificate function `Re (1 - z^2)^(-q)`.
//!
//! Measure conventions: [`extend`] integrates against normalized arclength
//! `d theta / 2 pi`, [`adjoint`] against plain `dr` on `[-1, 1]`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::Exponent;
use crate::error::{Error, Result};
use crate::quadrature::{Integrand, Quadrature, QuadratureResult, SingularityHint};

/// `(1 - r^2) / (1 - 2 r cos theta + r^2)` for `|r| < 1`.
pub fn poisson_kernel(r: f64, theta: f64) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(Error::domain("r", r, "(-1, 1)"));
    }
    Ok(kernel_from_parts(r, &AngleParts::of(theta)))
}

fn kernel_from_parts(r: f64, a: &AngleParts) -> f64 {
    // 1 - 2 r cos t + r^2, written without cancellation for either sign of r
    let den = if r >= 0.0 {
        (1.0 - r) * (1.0 - r) + 4.0 * r * a.sin_half_sq
    } else {
        (1.0 + r) * (1.0 + r) - 4.0 * r * a.cos_half_sq
    };
    (1.0 - r) * (1.0 + r) / den
}

/// Trigonometric data of an angle `anchor + offset`, exact near the anchors
/// `0`, `pi` and `2 pi` that the quadrature hands out as hint locations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AngleParts {
    pub sin: f64,
    pub cos: f64,
    pub sin_half_sq: f64,
    pub cos_half_sq: f64,
}

impl AngleParts {
    pub fn of(theta: f64) -> Self {
        let t = theta.rem_euclid(TAU);
        if t == PI {
            return Self::anchored(PI, 0.0);
        }
        let (s, c) = t.sin_cos();
        let (sh, ch) = (0.5 * t).sin_cos();
        AngleParts {
            sin: s,
            cos: c,
            sin_half_sq: sh * sh,
            cos_half_sq: ch * ch,
        }
    }

    pub fn anchored(anchor: f64, offset: f64) -> Self {
        let (s, c) = offset.sin_cos();
        let (sh, ch) = (0.5 * offset).sin_cos();
        if anchor == 0.0 || anchor == TAU {
            AngleParts {
                sin: s,
                cos: c,
                sin_half_sq: sh * sh,
                cos_half_sq: ch * ch,
            }
        } else if anchor == PI {
            AngleParts {
                sin: -s,
                cos: -c,
                sin_half_sq: ch * ch,
                cos_half_sq: sh * sh,
            }
        } else {
            Self::of(anchor + offset)
        }
    }
}

/// A real function on the unit circle, parametrized by `theta`.
pub trait BoundaryFunction: Sync {
    fn value(&self, theta: f64) -> f64;

    /// Value at `anchor + offset` with `offset` exact; see [`Integrand`].
    fn value_at(&self, anchor: f64, offset: f64) -> f64 {
        self.value(anchor + offset)
    }

    /// Integrable singularities on `[0, 2 pi]`, if any.
    fn hints(&self) -> Vec<SingularityHint> {
        Vec::new()
    }
}

/// A boundary function given by a closure plus its singularity hints.
pub struct BoundaryFn<F> {
    pub eval: F,
    pub hints: Vec<SingularityHint>,
}

impl<F: Fn(f64) -> f64 + Sync> BoundaryFunction for BoundaryFn<F> {
    fn value(&self, theta: f64) -> f64 {
        (self.eval)(theta)
    }

    fn hints(&self) -> Vec<SingularityHint> {
        self.hints.clone()
    }
}

/// `a0 + sum_n (a_n cos n theta + b_n sin n theta)`; its harmonic extension
/// multiplies the `n`-th term by `r^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub a0: f64,
    pub cos_coeffs: Vec<f64>,
    pub sin_coeffs: Vec<f64>,
}

impl TrigPolynomial {
    pub fn new(a0: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Result<Self> {
        if cos_coeffs.len() != sin_coeffs.len() {
            return Err(Error::domain(
                "sin_coeffs.len",
                sin_coeffs.len() as f64,
                "equal to cos_coeffs.len",
            ));
        }
        if !a0.is_finite() || cos_coeffs.iter().chain(&sin_coeffs).any(|c| !c.is_finite()) {
            return Err(Error::domain("coefficient", f64::NAN, "finite reals"));
        }
        Ok(TrigPolynomial {
            a0,
            cos_coeffs,
            sin_coeffs,
        })
    }

    pub fn constant(a0: f64) -> Self {
        TrigPolynomial {
            a0,
            cos_coeffs: Vec::new(),
            sin_coeffs: Vec::new(),
        }
    }

    /// `cos(n theta)`.
    pub fn cos_mode(n: usize) -> Self {
        Self::mode(n, true)
    }

    /// `sin(n theta)`.
    pub fn sin_mode(n: usize) -> Self {
        Self::mode(n, false)
    }

    fn mode(n: usize, cos: bool) -> Self {
        if n == 0 {
            return Self::constant(if cos { 1.0 } else { 0.0 });
        }
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        if cos {
            a[n - 1] = 1.0;
        } else {
            b[n - 1] = 1.0;
        }
        TrigPolynomial {
            a0: 0.0,
            cos_coeffs: a,
            sin_coeffs: b,
        }
    }

    pub fn degree(&self) -> usize {
        self.cos_coeffs.len()
    }

    /// Flat coefficient vector `[a0, a1, b1, a2, b2, ...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.degree() + 1);
        v.push(self.a0);
        for (a, b) in self.cos_coeffs.iter().zip(&self.sin_coeffs) {
            v.push(*a);
            v.push(*b);
        }
        v
    }

    /// Inverse of [`TrigPolynomial::to_vec`]; `v` must have odd length.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len().is_multiple_of(2) {
            return Err(Error::domain("len", v.len() as f64, "odd"));
        }
        let a = v[1..].iter().step_by(2).copied().collect();
        let b = v[2..].iter().step_by(2).copied().collect();
        TrigPolynomial::new(v[0], a, b)
    }

    pub fn is_zero(&self) -> bool {
        self.a0 == 0.0
            && self.cos_coeffs.iter().all(|&c| c == 0.0)
            && self.sin_coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        TrigPolynomial {
            a0: c * self.a0,
            cos_coeffs: self.cos_coeffs.iter().map(|x| c * x).collect(),
            sin_coeffs: self.sin_coeffs.iter().map(|x| c * x).collect(),
        }
    }

    /// The polynomial of `theta -> f(theta + s)`, i.e. `z -> f(z e^{is})`.
    pub fn rotated(&self, s: f64) -> Self {
        let mut a = Vec::with_capacity(self.degree());
        let mut b = Vec::with_capacity(self.degree());
        for (n, (an, bn)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let (sn, cn) = ((n + 1) as f64 * s).sin_cos();
            a.push(an * cn + bn * sn);
            b.push(bn * cn - an * sn);
        }
        TrigPolynomial {
            a0: self.a0,
            cos_coeffs: a,
            sin_coeffs: b,
        }
    }

    /// Harmonic extension at `r e^{i theta}`.
    pub fn extension(&self, r: f64, theta: f64) -> f64 {
        let step = Complex64::from_polar(r, theta);
        let mut w = step;
        let mut acc = self.a0;
        for (a, b) in self.cos_coeffs.iter().zip(&self.sin_coeffs) {
            acc += a * w.re + b * w.im;
            w *= step;
        }
        acc
    }

    /// Harmonic extension along the real diameter, `a0 + sum a_n r^n`.
    pub fn on_diameter(&self, r: f64) -> f64 {
        self.cos_coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, a| (acc + a) * r)
            + self.a0
    }
}

impl BoundaryFunction for TrigPolynomial {
    fn value(&self, theta: f64) -> f64 {
        self.extension(1.0, theta)
    }
}

/// Boundary values of `Re (1 - z^2)^(-q)`, `0 < q < 1`:
/// `(2 sin phi)^(-q) cos(q (pi/2 - phi))` with `phi = theta mod pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    q: f64,
}

impl Certificate {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(Certificate { q })
        } else {
            Err(Error::domain("q", q, "(0, 1)"))
        }
    }

    /// The Schur test function for exponent `p`: `q = 1/p`.
    pub fn for_exponent(e: Exponent) -> Self {
        Certificate { q: e.inv_p() }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Value from the reduced angle `phi` in `(0, pi)` and `sin phi`.
    #[inline]
    fn reduced(&self, phi_from_half: f64, sin_phi: f64) -> f64 {
        // phi_from_half = pi/2 - phi
        (2.0 * sin_phi).powf(-self.q) * (self.q * phi_from_half).cos()
    }

    /// Interior values on the diameter, `(1 - r^2)^(-q)`.
    pub fn on_diameter(&self, r: f64) -> f64 {
        ((1.0 - r) * (1.0 + r)).powf(-self.q)
    }
}

impl BoundaryFunction for Certificate {
    fn value(&self, theta: f64) -> f64 {
        let t = theta.rem_euclid(TAU);
        let phi = if t < PI { t } else { t - PI };
        self.reduced(FRAC_PI_2 - phi, phi.sin().abs())
    }

    fn value_at(&self, anchor: f64, offset: f64) -> f64 {
        let d = offset.abs();
        let right_of_anchor = offset > 0.0;
        if anchor == 0.0 || ((anchor == PI || anchor == TAU) && !right_of_anchor) {
            if right_of_anchor {
                // phi = d
                self.reduced(FRAC_PI_2 - d, d.sin())
            } else {
                // phi = pi - d
                self.reduced(d - FRAC_PI_2, d.sin())
            }
        } else if anchor == PI {
            self.reduced(FRAC_PI_2 - d, d.sin())
        } else {
            self.value(anchor + offset)
        }
    }

    fn hints(&self) -> Vec<SingularityHint> {
        [0.0, PI, TAU]
            .into_iter()
            .map(|x| SingularityHint::new(x, -self.q))
            .collect()
    }
}

/// `h(e^{i theta}) = Re (1 - e^{2 i theta})^(-1/p)` from its closed form.
///
/// Infinite at `theta in {0, pi}`, which are rejected.
pub fn h_boundary(e: Exponent, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < TAU) || theta == PI {
        return Err(Error::domain("theta", theta, "(0, pi) u (pi, 2 pi)"));
    }
    let p = e.p();
    let (s, phi) = if theta < PI {
        (theta.sin(), theta)
    } else {
        (theta.sin().abs(), theta - PI)
    };
    Ok(2f64.powf(-1.0 / p) * s.powf(-1.0 / p) * (e.half_angle() - phi / p).cos())
}

/// `Re (1 - z^2)^(-q)` on the principal branch, `|z| < 1`, `0 < q < 1`.
///
/// `Re (1 - z^2) > 0` on the disk, so the principal logarithm is analytic there.
pub fn re_power_interior(q: f64, z: Complex64) -> Result<f64> {
    if !(z.norm() < 1.0) {
        return Err(Error::domain("|z|", z.norm(), "[0, 1)"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain("q", q, "(0, 1)"));
    }
    let w = Complex64::new(1.0, 0.0) - z * z;
    Ok((-q * w.ln()).exp().re)
}

struct ExtendIntegrand<'a, B: ?Sized> {
    f: &'a B,
    r: f64,
}

impl<B: BoundaryFunction + ?Sized> Integrand for ExtendIntegrand<'_, B> {
    fn eval(&self, theta: f64) -> f64 {
        kernel_from_parts(self.r, &AngleParts::of(theta)) * self.f.value(theta)
    }

    fn eval_offset(&self, anchor: f64, offset: f64) -> f64 {
        kernel_from_parts(self.r, &AngleParts::anchored(anchor, offset))
            * self.f.value_at(anchor, offset)
    }
}

/// `(T f)(r) = (1/2 pi) integral_0^{2 pi} P(r, theta) f(theta) d theta`.
pub fn extend<B: BoundaryFunction + ?Sized>(f: &B, r: f64, tol: f64) -> Result<QuadratureResult> {
    if !(r.abs() < 1.0) {
        return Err(Error::domain("r", r, "(-1, 1)"));
    }
    let mut hints = f.hints();
    hints.push(SingularityHint::split(PI));
    let res =
        Quadrature::with_tol(tol * TAU).integrate(&ExtendIntegrand { f, r }, 0.0, TAU, &hints)?;
    Ok(res.scale(1.0 / TAU))
}

/// Geometry of the adjoint kernel at a fixed angle.
#[derive(Debug, Clone, Copy)]
struct KernelGeometry {
    c: f64,
    s: f64,
    one_minus_c: f64,
    one_plus_c: f64,
}

impl KernelGeometry {
    fn new(theta: f64) -> Self {
        let a = AngleParts::of(theta);
        KernelGeometry {
            c: a.cos,
            s: a.sin,
            one_minus_c: 2.0 * a.sin_half_sq,
            one_plus_c: 2.0 * a.cos_half_sq,
        }
    }

    /// `(1 - r, 1 + r, r - cos theta)` for `r = anchor + offset`.
    #[inline]
    fn parts(&self, anchor: f64, offset: f64) -> (f64, f64, f64) {
        if anchor == 1.0 {
            (-offset, 2.0 + offset, self.one_minus_c + offset)
        } else if anchor == -1.0 {
            (2.0 - offset, offset, offset - self.one_plus_c)
        } else if anchor == self.c {
            (self.one_minus_c - offset, self.one_plus_c + offset, offset)
        } else {
            let r = anchor + offset;
            (1.0 - r, 1.0 + r, r - self.c)
        }
    }

    #[inline]
    fn kernel(&self, anchor: f64, offset: f64) -> f64 {
        let (om, op, d) = self.parts(anchor, offset);
        om * op / (d * d + self.s * self.s)
    }
}

struct AdjointIntegrand<'a, G: ?Sized> {
    g: &'a G,
    geom: KernelGeometry,
}

impl<G: Integrand + ?Sized> Integrand for AdjointIntegrand<'_, G> {
    fn eval(&self, r: f64) -> f64 {
        self.geom.kernel(r, 0.0) * self.g.eval(r)
    }

    fn eval_offset(&self, anchor: f64, offset: f64) -> f64 {
        self.geom.kernel(anchor, offset) * self.g.eval_offset(anchor, offset)
    }
}

/// `(T* g)(theta) = integral_{-1}^{1} P(r, theta) g(r) dr`.
///
/// `g_hints` describe `g` alone; the kernel's own behaviour at `r = +-1` and
/// the split at `r = cos theta` are added here. At `theta = pi` the kernel has
/// a simple pole at `r = -1`, so `g` must vanish there for a finite result.
pub fn adjoint<G: Integrand + ?Sized>(
    g: &G,
    theta: f64,
    g_hints: &[SingularityHint],
    tol: f64,
) -> Result<QuadratureResult> {
    let t = theta.rem_euclid(TAU);
    if t == 0.0 || !t.is_finite() {
        return Err(Error::domain("theta", theta, "not a multiple of 2 pi"));
    }
    adjoint_unchecked(g, t, g_hints, tol)
}

pub(crate) fn adjoint_unchecked<G: Integrand + ?Sized>(
    g: &G,
    theta: f64,
    g_hints: &[SingularityHint],
    tol: f64,
) -> Result<QuadratureResult> {
    let geom = KernelGeometry::new(theta);
    let g_exp = |x: f64| {
        g_hints
            .iter()
            .filter(|h| h.location == x)
            .map(|h| h.exponent)
            .reduce(f64::min)
            .unwrap_or(0.0)
    };
    let mut hints: Vec<SingularityHint> = g_hints
        .iter()
        .filter(|h| h.location.abs() != 1.0)
        .copied()
        .collect();
    hints.push(SingularityHint::new(1.0, 1.0 + g_exp(1.0)));
    let pole_at_minus_one = geom.one_plus_c == 0.0;
    let kernel_minus = if pole_at_minus_one { -1.0 } else { 1.0 };
    hints.push(SingularityHint::new(-1.0, kernel_minus + g_exp(-1.0)));
    if geom.c.abs() < 1.0 {
        hints.push(SingularityHint::split(geom.c));
    }
    Ok(Quadrature::with_tol(tol).integrate(&AdjointIntegrand { g, geom }, -1.0, 1.0, &hints)?)
}

/// `(1 - r^2)^exponent` on `(-1, 1)`, exact near the endpoints.
#[derive(Debug, Clone, Copy)]
pub struct DiameterPower {
    pub exponent: f64,
}

impl DiameterPower {
    pub fn hints(&self) -> [SingularityHint; 2] {
        [
            SingularityHint::new(-1.0, self.exponent),
            SingularityHint::new(1.0, self.exponent),
        ]
    }
}

impl Integrand for DiameterPower {
    fn eval(&self, r: f64) -> f64 {
        ((1.0 - r) * (1.0 + r)).powf(self.exponent)
    }

    fn eval_offset(&self, anchor: f64, offset: f64) -> f64 {
        let w = if anchor == 1.0 {
            -offset * (2.0 + offset)
        } else if anchor == -1.0 {
            offset * (2.0 - offset)
        } else {
            let r = anchor + offset;
            (1.0 - r) * (1.0 + r)
        };
        w.powf(self.exponent)
    }
}

/// `(T h)(r) - (1 - r^2)^(-1/p)` for the certificate `h`.
pub fn mean_value_check(e: Exponent, r: f64, tol: f64) -> Result<f64> {
    let h = Certificate::for_exponent(e);
    let th = extend(&h, r, tol)?;
    Ok(th.value - h.on_diameter(r))
}
