//! Scalar abstraction shared by the numerical core.

mod mpf;

pub use mpf::Mpf;

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Real scalar used by generic routines.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Decimal digits carried by the format.
    const DIGITS: u32;

    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn int(k: i64) -> Self {
        <Self as FromPrimitive>::from_i64(k).expect("integer literal")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const DIGITS: u32 = 7;
}

impl Real for f64 {
    const DIGITS: u32 = 15;
}

impl<const L: usize> Real for Mpf<L> {
    const DIGITS: u32 = (64 * L as u32 * 30103) / 100000;
}

/// Working precision selector exposed through configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// binary64
    Double,
    /// 128-bit significand
    Extended,
    /// 256-bit significand
    Quad,
    /// 512-bit significand
    Octo,
}

impl Precision {
    pub fn digits(self) -> u32 {
        match self {
            Precision::Double => f64::DIGITS,
            Precision::Extended => <Mpf<2> as Real>::DIGITS,
            Precision::Quad => <Mpf<4> as Real>::DIGITS,
            Precision::Octo => <Mpf<8> as Real>::DIGITS,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "double" | "f64" => Some(Precision::Double),
            "extended" | "dd" => Some(Precision::Extended),
            "quad" => Some(Precision::Quad),
            "octo" => Some(Precision::Octo),
            _ => None,
        }
    }
}
