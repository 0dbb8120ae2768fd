//! The quadratic/linear model V = x, W = y²/2 + αy: phase classification,
//! critical curves, the parameter γ near (−1, 1), and the triple-scaling
//! convergence probe.

pub mod classify;
pub mod gamma;
pub mod triple;

pub use classify::{
    classify, intersection_certificate, phase_map, Case, IntersectionCertificate, PhasePoint,
};
pub use gamma::{gamma_expansion, gamma_forward, solve_gamma, GammaExpansion};
pub use triple::{triple_scaling_probe, ScalingPath, TripleReport};

use crate::kernel::KernelError;

#[derive(Debug, thiserror::Error)]
pub enum PhaseError {
    #[error("tau must be > 0 (got {0})")]
    Tau(f64),
    #[error("gamma continuation from (-1, 1) failed at (alpha, tau) = ({alpha}, {tau}): {reason}")]
    Continuation {
        alpha: f64,
        tau: f64,
        reason: String,
    },
    #[error("scaling path: {0}")]
    Path(String),
    #[error("fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}
