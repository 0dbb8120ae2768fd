//! Monte Carlo sampling of the two-matrix model: exact Gaussian sampling for
//! linear potentials, Metropolis-within-Gibbs otherwise, and comparison of
//! the squared singular values of Φ₁ against the kernel.

pub mod compare;
pub mod gaussian;
pub mod mcmc;
mod rng;

pub use compare::{
    compare_to_kernel, ks_one_sample, ks_two_sample, CompareReport, GapCheck, PairCheck,
};
pub use gaussian::{sample_gaussian, sample_gaussian_params, wishart_reference, GaussianParams};
pub use mcmc::{one_by_one_check, sample_mcmc, McmcOptions, OneByOneReport};

use num_complex::Complex64;
use serde::Serialize;

use crate::kernel::KernelError;
use crate::model::ModelSpec;

#[derive(Debug, thiserror::Error)]
pub enum McError {
    #[error("matrix sampling needs an integer nu >= 0 (got {0})")]
    Nu(f64),
    #[error("the Gaussian sampler needs V = c1 x and W = c2 y with tau^2 < c1 c2")]
    NotLinear,
    #[error("the Gibbs step needs V linear with positive slope")]
    VNotLinear,
    #[error("invalid sampler option: {0}")]
    Option(String),
    #[error("chain {chain} diverged at sweep {sweep}")]
    Divergence { chain: usize, sweep: usize },
    #[error("batch spec differs from the kernel spec")]
    SpecMismatch,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Gaussian,
    Wishart,
    Mcmc,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleBatch {
    /// absent for parameter sets without a kernel (τ = 0)
    pub spec: Option<ModelSpec>,
    pub mode: Mode,
    pub seed: u64,
    pub chains: usize,
    pub samples_per_chain: Vec<usize>,
    /// sorted squared singular values of Φ₁, one row per configuration
    pub sv: Vec<Vec<f64>>,
    /// post-burn-in Metropolis acceptance per chain
    pub acceptance: Vec<f64>,
    /// tuned proposal step per chain
    pub step: Vec<f64>,
    pub tuning_failed: bool,
    /// lag-1 autocorrelation of Tr Φ₁Φ₁* per chain
    pub autocorrelation: Vec<f64>,
}

impl SampleBatch {
    pub fn pooled(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.sv.iter().flatten().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

pub(crate) fn integer_nu(spec: &ModelSpec) -> Result<usize, McError> {
    let nu = spec.nu;
    if nu >= 0.0 && nu.fract() == 0.0 && nu < 1e6 {
        Ok(nu as usize)
    } else {
        Err(McError::Nu(nu))
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, Debug)]
pub(crate) struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            a: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// A A* (rows × rows).
    pub fn gram(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.rows, |i, j| {
            (0..self.cols)
                .map(|k| self.a[i * self.cols + k] * self.a[j * self.cols + k].conj())
                .sum()
        })
    }

    /// Sorted eigenvalues of A A*, clamped at 0.
    pub fn squared_singular_values(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .gram()
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v.max(0.0))
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum()
    }
}
