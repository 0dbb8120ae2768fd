//! The coupled Bessel weight and its one-variable transforms.

pub mod moments;
pub mod spec;
pub mod weights;

pub use moments::{MomentError, MomentTable};
pub use spec::{ModelError, ModelSpec, Poly, SpecInput};
pub use weights::{f_n, f_n_complex, f_n_derivs, w_n, HQuadrature, WeightTable};
