//! Error categories and their exit codes.

use c2mm::biortho::BiorthError;
use c2mm::equilibrium::EquilibriumError;
use c2mm::kernel::KernelError;
use c2mm::mcsim::McError;
use c2mm::model::ModelError;
use c2mm::ode3::Ode3Error;
use c2mm::phase::PhaseError;

#[derive(Debug)]
pub enum CliError {
    /// bad arguments, configuration or model spec
    Validation(String),
    /// a numerical check exceeded its tolerance
    Tolerance(String),
    /// too few digits for the requested computation
    Conditioning(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Tolerance(_) => 3,
            CliError::Conditioning(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m)
            | CliError::Tolerance(m)
            | CliError::Conditioning(m)
            | CliError::Io(m) => m,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(format!("invalid model spec: {e}"))
    }
}

impl From<BiorthError> for CliError {
    fn from(e: BiorthError) -> Self {
        match e {
            BiorthError::Conditioning { .. } => CliError::Conditioning(e.to_string()),
            BiorthError::Model(m) => m.into(),
            BiorthError::Degree(_) => CliError::Validation(e.to_string()),
            _ => CliError::Tolerance(e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Conditioning { .. } => CliError::Conditioning(e.to_string()),
            KernelError::Biorth(b) => b.into(),
            KernelError::Model(m) => m.into(),
            KernelError::Domain(_)
            | KernelError::Range(..)
            | KernelError::Gap(_)
            | KernelError::Regime(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<Ode3Error> for CliError {
    fn from(e: Ode3Error) -> Self {
        match e {
            Ode3Error::NotQuadratic | Ode3Error::Cut { .. } | Ode3Error::Range { .. } => {
                CliError::Validation(e.to_string())
            }
            Ode3Error::Precision { .. } => CliError::Conditioning(e.to_string()),
            _ => CliError::Tolerance(e.to_string()),
        }
    }
}

impl From<EquilibriumError> for CliError {
    fn from(e: EquilibriumError) -> Self {
        match e {
            EquilibriumError::Kernel(k) => k.into(),
            EquilibriumError::Request(_) | EquilibriumError::Input(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Tolerance(e.to_string()),
        }
    }
}

impl From<PhaseError> for CliError {
    fn from(e: PhaseError) -> Self {
        match e {
            PhaseError::Kernel(k) => k.into(),
            PhaseError::Tau(_) | PhaseError::Path(_) => CliError::Validation(e.to_string()),
            _ => CliError::Tolerance(e.to_string()),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::Kernel(k) => k.into(),
            McError::Divergence { .. } => CliError::Tolerance(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}
