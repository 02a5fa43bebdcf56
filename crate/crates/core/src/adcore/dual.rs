use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::normal;

use super::scalar::{bvn_partials, Scalar};

/// First order forward-mode number: a value with one directional tangent.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }
}

impl Add for Dual {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Dual {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v;
        Self::new(q, (self.d - q * o.d) / o.v)
    }
}

impl Neg for Dual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.v, -self.d)
    }
}

impl Add<f64> for Dual {
    type Output = Self;
    #[inline]
    fn add(self, c: f64) -> Self {
        Self::new(self.v + c, self.d)
    }
}

impl Sub<f64> for Dual {
    type Output = Self;
    #[inline]
    fn sub(self, c: f64) -> Self {
        Self::new(self.v - c, self.d)
    }
}

impl Mul<f64> for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, c: f64) -> Self {
        Self::new(self.v * c, self.d * c)
    }
}

impl Div<f64> for Dual {
    type Output = Self;
    #[inline]
    fn div(self, c: f64) -> Self {
        Self::new(self.v / c, self.d / c)
    }
}

impl Scalar for Dual {
    #[inline]
    fn constant(c: f64) -> Self {
        Self::new(c, 0.0)
    }
    #[inline]
    fn value(&self) -> f64 {
        self.v
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.v.exp();
        Self::new(e, e * self.d)
    }
    #[inline]
    fn ln(self) -> Self {
        Self::new(self.v.ln(), self.d / self.v)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Self::new(s, self.d / (2.0 * s))
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        Self::new(self.v.powf(p), p * self.v.powf(p - 1.0) * self.d)
    }
    #[inline]
    fn pos(self) -> Self {
        if self.v > 0.0 {
            self
        } else {
            Self::default()
        }
    }
    #[inline]
    fn norm_cdf(self) -> Self {
        Self::new(normal::cdf(self.v), normal::pdf(self.v) * self.d)
    }
    #[inline]
    fn norm_pdf(self) -> Self {
        let p = normal::pdf(self.v);
        Self::new(p, -self.v * p * self.d)
    }
    #[inline]
    fn norm_inv(self) -> Self {
        let q = normal::inv_cdf(self.v);
        Self::new(q, self.d / normal::pdf(q))
    }
    fn bvn_cdf(a: Self, b: Self, rho: f64) -> Self {
        let (da, db) = bvn_partials(a.v, b.v, rho);
        Self::new(normal::bvn_cdf(a.v, b.v, rho), da * a.d + db * b.d)
    }
}
