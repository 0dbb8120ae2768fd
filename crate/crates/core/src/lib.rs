//! Numerics for the chiral two-matrix model.

pub mod biortho;
pub mod equilibrium;
pub mod kernel;
pub mod linalg;
pub mod mcsim;
pub mod model;
pub mod ode3;
pub mod phase;
pub mod scalar;
pub mod specfun;

pub use scalar::{Mpf, Precision, Real};

/// 128-bit significand, the default extended mode.
pub type Ext = Mpf<2>;
/// 256-bit significand.
pub type Quad = Mpf<4>;
/// 512-bit significand.
pub type Octo = Mpf<8>;

/// Common imports for generic numeric code.
pub mod prelude {
    pub use crate::scalar::Real;
    pub use num_traits::{Float, FloatConst, FromPrimitive, One, ToPrimitive, Zero};
}
