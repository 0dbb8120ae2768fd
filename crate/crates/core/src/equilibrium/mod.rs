//! Logarithmic energies, the squaring correspondence of measures, and the
//! finite-n extrapolation of the limiting density.

pub mod density;
pub mod energy;
pub mod measure;

pub use density::{
    density_extrapolate, density_extrapolate_with, interior_grid, DensityReport, DensityRequest,
};
pub use energy::{energy_functional, log_energy, mutual_energy, EnergyBreakdown};
pub use measure::{
    square_field, square_measure, symmetric_root, Axis, DiscreteMeasure, MeasureInput, SampledField,
};

use crate::kernel::KernelError;

#[derive(Debug, thiserror::Error)]
pub enum EquilibriumError {
    #[error("invalid measure: {0}")]
    Input(String),
    #[error("negative mass {mass} at {node}")]
    Negative { node: f64, mass: f64 },
    #[error("measure is not symmetric under reflection (defect {0:.3e})")]
    Symmetry(f64),
    #[error("infinite energy: mass {mass} concentrated at {node}")]
    InfiniteEnergy { node: f64, mass: f64 },
    #[error("nu_{which} has mass {got}, expected {want}")]
    Mass { which: usize, got: f64, want: f64 },
    #[error("upper constraint nu_2 <= sigma_2 violated by {excess:.3e} at {node}")]
    UpperConstraint { node: f64, excess: f64 },
    #[error("field evaluated at {0} outside its grid")]
    FieldRange(f64),
    #[error("density request: {0}")]
    Request(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}
