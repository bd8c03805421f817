//! Complex numbers over MPFR floats with an explicit working precision.

use std::fmt;

use rug::float::Constant;
use rug::{Assign, Float};

/// Smallest precision accepted anywhere in the analytic code.
pub const MIN_PRECISION: u32 = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        Self { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn from_real<T>(prec: u32, re: T) -> Self
    where
        Float: Assign<T>,
    {
        Self { re: Float::with_val(prec, re), im: Float::new(prec) }
    }

    pub fn from_parts(prec: u32, re: &Float, im: &Float) -> Self {
        Self { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    /// `r·e^{iθ}`.
    pub fn from_polar(r: &Float, theta: &Float) -> Self {
        let prec = r.prec().max(theta.prec());
        let (sin, cos) = Float::with_val(prec, theta).sin_cos(Float::new(prec));
        Self { re: cos * r, im: sin * r }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec();
        Self { re: Float::with_val(prec, &self.re + &other.re), im: Float::with_val(prec, &self.im + &other.im) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let prec = self.prec();
        Self { re: Float::with_val(prec, &self.re - &other.re), im: Float::with_val(prec, &self.im - &other.im) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec();
        let ac = Float::with_val(prec, &self.re * &other.re);
        let bd = Float::with_val(prec, &self.im * &other.im);
        let ad = Float::with_val(prec, &self.re * &other.im);
        let bc = Float::with_val(prec, &self.im * &other.re);
        Self { re: ac - bd, im: ad + bc }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn scale(&self, k: &Float) -> Self {
        let prec = self.prec();
        Self { re: Float::with_val(prec, &self.re * k), im: Float::with_val(prec, &self.im * k) }
    }

    /// `|z|²`.
    pub fn norm(&self) -> Float {
        let prec = self.prec();
        Float::with_val(prec, self.re.clone().square() + self.im.clone().square())
    }

    pub fn abs(&self) -> Float {
        self.norm().sqrt()
    }

    pub fn recip(&self) -> Self {
        let n = self.norm();
        let prec = self.prec();
        Self { re: Float::with_val(prec, &self.re / &n), im: -Float::with_val(prec, &self.im / &n) }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }

    /// True when `|z| < 2^e`.
    pub fn below_pow2(&self, e: i64) -> bool {
        let n = self.norm();
        if n.is_zero() {
            return true;
        }
        // |z|² < 2^(2e)
        let bound = Float::with_val(self.prec(), 1u32) << (2 * e) as i32;
        n < bound
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = self.re.to_f64();
        let im = self.im.to_f64();
        if im < 0.0 {
            write!(f, "{re} - {}i", -im)
        } else {
            write!(f, "{re} + {im}i")
        }
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_identities() {
        let z = BigComplex::from_parts(128, &Float::with_val(128, 3), &Float::with_val(128, -4));
        assert_eq!(z.abs(), 5);
        let w = z.mul(&z.recip());
        assert!(w.sub(&BigComplex::from_real(128, 1)).below_pow2(-120));
        let i = BigComplex::from_polar(&Float::with_val(128, 1), &(pi(128) / 2u32));
        assert!(i.square().add(&BigComplex::from_real(128, 1)).below_pow2(-120));
    }
}
