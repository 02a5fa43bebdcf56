use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::normal;

use super::AdError;

/// Arithmetic shared by plain reals, forward duals and taped variables.
///
/// Model code written against this trait can be evaluated plainly, recorded on a
/// tape for reverse sweeps, or recorded with dual values for second order sweeps.
/// Branching must go through [`Scalar::value`], which yields a constant.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn constant(c: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    /// `max(x, 0)`, with derivative 0 at the kink.
    fn pos(self) -> Self;
    fn norm_cdf(self) -> Self;
    fn norm_pdf(self) -> Self;
    fn norm_inv(self) -> Self;
    /// Bivariate normal CDF in the two limits, correlation held constant.
    fn bvn_cdf(a: Self, b: Self, rho: f64) -> Self;

    fn zero() -> Self {
        Self::constant(0.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn constant(c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    #[inline]
    fn pos(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }
    #[inline]
    fn norm_cdf(self) -> Self {
        normal::cdf(self)
    }
    #[inline]
    fn norm_pdf(self) -> Self {
        normal::pdf(self)
    }
    #[inline]
    fn norm_inv(self) -> Self {
        normal::inv_cdf(self)
    }
    #[inline]
    fn bvn_cdf(a: Self, b: Self, rho: f64) -> Self {
        normal::bvn_cdf(a, b, rho)
    }
}

/// Partial derivatives of the bivariate normal CDF in its two limits.
pub(crate) fn bvn_partials<S: Scalar>(a: S, b: S, rho: f64) -> (S, S) {
    let s = (1.0 - rho * rho).sqrt();
    let da = a.norm_pdf() * ((b - a * rho) / s).norm_cdf();
    let db = b.norm_pdf() * ((a - b * rho) / s).norm_cdf();
    (da, db)
}

/// Applies a unary primitive looked up by name.
///
/// Supported names: `neg`, `exp`, `log`, `sqrt`, `pos` (alias `max0`), `norm_cdf`,
/// `norm_pdf`, `norm_inv`.
pub fn apply_unary<S: Scalar>(name: &str, x: S) -> Result<S, AdError> {
    Ok(match name {
        "neg" => -x,
        "exp" => x.exp(),
        "log" | "ln" => x.ln(),
        "sqrt" => x.sqrt(),
        "pos" | "max0" => x.pos(),
        "norm_cdf" => x.norm_cdf(),
        "norm_pdf" => x.norm_pdf(),
        "norm_inv" => x.norm_inv(),
        other => return Err(AdError::UnsupportedPrimitive(other.to_string())),
    })
}
