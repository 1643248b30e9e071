//! The exponent type, the closed-form constants of the sharp inequality, and
//! the special functions needed to cross-check them.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};

/// An exponent `p` with `1 < p < inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(Exponent(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    #[inline]
    pub fn p(self) -> f64 {
        self.0
    }

    /// `1/p`.
    #[inline]
    pub fn inv_p(self) -> f64 {
        1.0 / self.0
    }

    /// `pi/(2p)`, always in `(0, pi/2)`.
    #[inline]
    pub fn half_angle(self) -> f64 {
        FRAC_PI_2 / self.0
    }

    /// `(p-1)/p`, the conjugate reciprocal `1/p'`.
    #[inline]
    pub fn conj_inv(self) -> f64 {
        (self.0 - 1.0) / self.0
    }

    pub fn constants(self) -> SharpConstants {
        SharpConstants::new(self)
    }
}

/// Validates `p` and wraps it.
pub fn make_exponent(p: f64) -> Result<Exponent> {
    Exponent::new(p)
}

/// The three constants tied together by the proof.
///
/// `kp` is the inequality constant against raw `d theta`, `cp = 2 pi kp` the
/// same constant against normalized arclength, and `bp` the bound on the
/// reduced one-dimensional integral `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpConstants {
    pub p: f64,
    pub kp: f64,
    pub cp: f64,
    pub bp: f64,
}

impl SharpConstants {
    pub fn new(e: Exponent) -> Self {
        let kp = sharp_constant(e);
        SharpConstants {
            p: e.p(),
            kp,
            cp: 2.0 * PI * kp,
            bp: f_bound(e),
        }
    }
}

/// `K_p = 1 / (2 cos^p(pi/(2p)))`.
pub fn sharp_constant(e: Exponent) -> f64 {
    0.5 / e.half_angle().cos().powf(e.p())
}

/// `C_p = pi / cos^p(pi/(2p))`, the Schur-test constant for normalized arclength.
pub fn schur_constant(e: Exponent) -> f64 {
    2.0 * PI * sharp_constant(e)
}

/// `B_p = pi / (2 cos(pi/(2p)))`, the value of `F` at both endpoints.
pub fn f_bound(e: Exponent) -> f64 {
    FRAC_PI_2 / e.half_angle().cos()
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("x", x, "(0, inf)"));
    }
    Ok(ln_gamma_positive(x))
}

fn ln_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return (PI / (PI * x).sin()).ln() - ln_gamma_positive(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// The Beta function `B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("a", a, "(0, inf)"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain("b", b, "(0, inf)"));
    }
    Ok((ln_gamma_positive(a) + ln_gamma_positive(b) - ln_gamma_positive(a + b)).exp())
}

/// The default exponent grid used by sweeps and the acceptance battery.
pub const P_GRID: [f64; 9] = [1.05, 1.1, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0, 16.0];
