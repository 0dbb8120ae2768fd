//! Correlation kernel of the squared singular values, its density and
//! determinantal statistics.

pub mod evaluator;
pub mod gap;
pub mod scaling;

pub use evaluator::{build_kernel, Kernel, KernelChecks, KernelEvaluator};
pub use gap::{gap_probability, GapRequest, GapResult};
pub use scaling::{scaling_limit_compare, Regime, ScalingReport, ScalingRequest, Side};

use crate::biortho::BiorthError;
use crate::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error(transparent)]
    Biorth(#[from] BiorthError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("conditioning alarm: log10 cond = {log10_cond:.1} leaves too few of {digits} digits")]
    Conditioning { log10_cond: f64, digits: u32 },
    #[error("kernel arguments must be positive, got {0}")]
    Domain(f64),
    #[error("x = {0} beyond the tabulated range {1}")]
    Range(f64, f64),
    #[error("gap probability: {0}")]
    Gap(String),
    #[error("regime mismatch: {0}")]
    Regime(String),
}

/// (x, ρ_n(x)) on the grid, evaluated in parallel.
pub fn mean_density(ke: &dyn Kernel, grid: &[f64]) -> Result<Vec<(f64, f64)>, KernelError> {
    use rayon::prelude::*;
    grid.par_iter().map(|&x| Ok((x, ke.density(x)?))).collect()
}
