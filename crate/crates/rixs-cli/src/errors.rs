//! Exit-code classification. Every error class maps to a distinct process
//! exit code (documented in the README):
//! 2 usage/config, 3 I/O, 4 input parsing, 5 physics/validation,
//! 6 numerical non-convergence.

use rixs_core::bliss_thc::BlissError;
use rixs_core::emulator::EmulatorError;
use rixs_core::exact_spectra::SpectraError;
use rixs_core::fock::FockError;
use rixs_core::qchem_io::QchemIoError;
use rixs_core::resolvent::ResolventError;
use rixs_core::resources::ResourceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Usage = 2,
    Io = 3,
    Parse = 4,
    Physics = 5,
    Numerical = 6,
}

#[derive(Debug)]
pub struct CliError {
    pub class: ExitClass,
    pub error: anyhow::Error,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            class: ExitClass::Usage,
            error: anyhow::anyhow!(msg.into()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class as i32
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            class: ExitClass::Io,
            error: e.into(),
        }
    }
}

impl From<QchemIoError> for CliError {
    fn from(e: QchemIoError) -> Self {
        CliError {
            class: ExitClass::Parse,
            error: e.into(),
        }
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        CliError {
            class: ExitClass::Physics,
            error: e.into(),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        let class = match e {
            SpectraError::NonConvergence { .. } => ExitClass::Numerical,
            _ => ExitClass::Physics,
        };
        CliError {
            class,
            error: e.into(),
        }
    }
}

impl From<ResolventError> for CliError {
    fn from(e: ResolventError) -> Self {
        CliError {
            class: ExitClass::Physics,
            error: e.into(),
        }
    }
}

impl From<EmulatorError> for CliError {
    fn from(e: EmulatorError) -> Self {
        let class = match e {
            EmulatorError::ReferenceParse { .. } | EmulatorError::EmptyReference => {
                ExitClass::Parse
            }
            _ => ExitClass::Physics,
        };
        CliError {
            class,
            error: e.into(),
        }
    }
}

impl From<BlissError> for CliError {
    fn from(e: BlissError) -> Self {
        let class = match e {
            BlissError::FactorFormat(_) => ExitClass::Parse,
            _ => ExitClass::Physics,
        };
        CliError {
            class,
            error: e.into(),
        }
    }
}

impl From<ResourceError> for CliError {
    fn from(e: ResourceError) -> Self {
        CliError {
            class: ExitClass::Physics,
            error: e.into(),
        }
    }
}
