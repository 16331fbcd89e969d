use std::process::ExitCode;

use thiserror::Error;
use toroidsim::implant::ImplantError;
use toroidsim::spectra::SpectraError;
use toroidsim::thermal::ThermalError;
use toroidsim::wgm::WgmError;
use toroidsim::ConfigError;

/// Errors surfaced to the user, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or input files.
    #[error("{0}")]
    Usage(String),
    /// The inputs were valid but the computation failed.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Usage(format!("{}: {e}", path.display()))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(format!("config: {e}"))
    }
}

impl From<WgmError> for CliError {
    fn from(e: WgmError) -> Self {
        match e {
            WgmError::PhaseMatching { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ThermalError> for CliError {
    fn from(e: ThermalError) -> Self {
        match e {
            ThermalError::InvalidParameter(_) | ThermalError::OmegaOutOfRange(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ImplantError> for CliError {
    fn from(e: ImplantError) -> Self {
        match e {
            ImplantError::NotNormalized(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Wgm(w) => w.into(),
            SpectraError::TooFewPeaks(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numerical(format!("report serialization: {e}"))
    }
}
