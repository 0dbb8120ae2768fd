//! Values carried as mantissa · e^scale to survive overflow.

use num_complex::Complex64;
use std::ops::{Div, Mul};

use crate::prelude::*;

/// Real value mantissa·e^{log_scale} with |mantissa| ∈ [1, e) or mantissa = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogScaled<T> {
    pub mantissa: T,
    pub log_scale: T,
}

impl<T: Real> LogScaled<T> {
    pub fn zero() -> Self {
        Self {
            mantissa: T::zero(),
            log_scale: T::zero(),
        }
    }

    /// Normalize an arbitrary (mantissa, scale) pair.
    pub fn new(mantissa: T, log_scale: T) -> Self {
        if mantissa == T::zero() || !mantissa.is_finite() {
            return Self {
                mantissa,
                log_scale: if mantissa == T::zero() {
                    T::zero()
                } else {
                    log_scale
                },
            };
        }
        let l = mantissa.abs().ln().floor();
        Self {
            mantissa: mantissa / l.exp(),
            log_scale: log_scale + l,
        }
    }

    pub fn from_value(v: T) -> Self {
        Self::new(v, T::zero())
    }

    /// Build from ln|v| and a sign.
    pub fn from_ln(ln_abs: T, negative: bool) -> Self {
        if ln_abs == T::neg_infinity() {
            return Self::zero();
        }
        let l = ln_abs.floor();
        let m = (ln_abs - l).exp();
        Self {
            mantissa: if negative { -m } else { m },
            log_scale: l,
        }
    }

    pub fn value(&self) -> T {
        if self.mantissa == T::zero() {
            return T::zero();
        }
        self.mantissa * self.log_scale.exp()
    }

    /// ln|value|
    pub fn ln_abs(&self) -> T {
        self.mantissa.abs().ln() + self.log_scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == T::zero()
    }

    /// Value times e^{-shift}.
    pub fn value_scaled(&self, shift: T) -> T {
        if self.mantissa == T::zero() {
            return T::zero();
        }
        self.mantissa * (self.log_scale - shift).exp()
    }

    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let s = self.log_scale.max(other.log_scale);
        Self::new(self.value_scaled(s) + other.value_scaled(s), s)
    }

    pub fn neg(self) -> Self {
        Self {
            mantissa: -self.mantissa,
            ..self
        }
    }

    pub fn scale_by_exp(self, t: T) -> Self {
        Self::new(self.mantissa, self.log_scale + t)
    }
}

impl<T: Real> Mul for LogScaled<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.mantissa * rhs.mantissa, self.log_scale + rhs.log_scale)
    }
}

impl<T: Real> Div for LogScaled<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::new(self.mantissa / rhs.mantissa, self.log_scale - rhs.log_scale)
    }
}

/// Complex value mantissa·e^{log_scale}, log_scale real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogScaledC {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl LogScaledC {
    pub fn zero() -> Self {
        Self {
            mantissa: Complex64::new(0.0, 0.0),
            log_scale: 0.0,
        }
    }

    pub fn new(mantissa: Complex64, log_scale: f64) -> Self {
        let a = mantissa.norm();
        if a == 0.0 || !a.is_finite() {
            return Self {
                mantissa,
                log_scale: if a == 0.0 { 0.0 } else { log_scale },
            };
        }
        let l = a.ln().floor();
        Self {
            mantissa: mantissa / l.exp(),
            log_scale: log_scale + l,
        }
    }

    pub fn from_value(v: Complex64) -> Self {
        Self::new(v, 0.0)
    }

    /// exp(w) for complex w without overflow.
    pub fn exp(w: Complex64) -> Self {
        let l = w.re.floor();
        Self {
            mantissa: Complex64::from_polar((w.re - l).exp(), w.im),
            log_scale: l,
        }
    }

    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn value_scaled(&self, shift: f64) -> Complex64 {
        if self.mantissa.norm() == 0.0 {
            return self.mantissa;
        }
        self.mantissa * (self.log_scale - shift).exp()
    }

    pub fn ln(&self) -> Complex64 {
        self.mantissa.ln() + self.log_scale
    }

    pub fn add(self, other: Self) -> Self {
        if self.mantissa.norm() == 0.0 {
            return other;
        }
        if other.mantissa.norm() == 0.0 {
            return self;
        }
        let s = self.log_scale.max(other.log_scale);
        Self::new(self.value_scaled(s) + other.value_scaled(s), s)
    }

    pub fn scale(self, c: Complex64) -> Self {
        Self::new(self.mantissa * c, self.log_scale)
    }
}

impl Mul for LogScaledC {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.mantissa * rhs.mantissa, self.log_scale + rhs.log_scale)
    }
}

impl Div for LogScaledC {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::new(self.mantissa / rhs.mantissa, self.log_scale - rhs.log_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_range() {
        for &v in &[1e-300, 0.3, 1.0, 2.0, 2.8, 1e300, -5.0] {
            let x = LogScaled::from_value(v);
            let m = x.mantissa.abs();
            assert!(m >= 1.0 && m < std::f64::consts::E, "{v}: {m}");
            assert!((x.value() - v).abs() <= 1e-14 * v.abs());
        }
    }

    #[test]
    fn mul_beyond_overflow() {
        let a = LogScaled::from_ln(800.0, false);
        let b = LogScaled::from_ln(-790.0, true);
        let c = a * b;
        assert!((c.value() + 10f64.exp()).abs() < 1e-9 * 10f64.exp());
        let d = a.add(a);
        assert!((d.ln_abs() - (800.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn ops_decode_consistently() {
        let a = LogScaled::from_value(3.5);
        let b = LogScaled::from_value(-0.25);
        assert!(((a * b).value() + 0.875).abs() < 1e-15);
        assert!(((a / b).value() + 14.0).abs() < 1e-13);
        assert!((a.add(b).value() - 3.25).abs() < 1e-15);
    }

    #[test]
    fn complex_exp() {
        let w = Complex64::new(900.0, 1.0);
        let e = LogScaledC::exp(w);
        let back = e.ln();
        assert!((back - w).norm() < 1e-12);
    }
}
