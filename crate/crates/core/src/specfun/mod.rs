//! Special functions and quadrature primitives.

pub mod airy;
pub mod bessel;
pub mod erfc;
pub mod gamma;
pub mod logscaled;
pub mod quad;

pub use airy::{airy, bessel_j};
pub use bessel::{bessel_i, bessel_i_complex, bessel_k_complex, BesselError};
pub use erfc::erfc_scaled;
pub use gamma::{gamma, ln_gamma, rgamma};
pub use logscaled::{LogScaled, LogScaledC};
pub use quad::{
    build_quadrature, power_weighted_panels, DecayHint, Domain, QuadError, QuadratureRule, RuleKind,
};
