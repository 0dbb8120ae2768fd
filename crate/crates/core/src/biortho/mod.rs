//! Biorthogonal polynomials from the bimoment matrix and the two systems
//! of multiple orthogonality relations they satisfy.

pub mod bimoments;
pub mod mop;
pub mod outer;
pub mod system;
pub mod verify;

pub use bimoments::{build_bimoments, build_bimoments_unchecked, BimomentMatrix, BimomentSeries};
pub use mop::{
    check_mop, check_mop_with, mop_indices, quadrature_bimoments, verification_rule, MopReport,
    MopVariant,
};
pub use outer::OuterRule;
pub use system::{biorthogonalize, laguerre_fit, BiorthSystem, LaguerreFit, SystemReport};
pub use verify::{verify, BiorthReport};

use crate::model::{ModelError, MomentError};

#[derive(Debug, thiserror::Error)]
pub enum BiorthError {
    #[error("{0}")]
    Series(String),
    #[error("conditioning alarm: log10 cond = {log10_cond:.1} exceeds {limit:.1}")]
    Conditioning { log10_cond: f64, limit: f64 },
    #[error("invalid degree {0}")]
    Degree(usize),
    #[error("singular leading minor at degree {degree}")]
    SingularMinor { degree: usize },
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
