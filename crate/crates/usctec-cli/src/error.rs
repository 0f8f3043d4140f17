//! Error-to-exit-code mapping. All failures are emitted as one JSON object
//! on stderr: `{"kind": ..., "message": ...}`.

use serde::Serialize;
use usctec::simulator::SimulatorError;

#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip)]
    pub code: i32,
}

impl CliError {
    /// Bad input: unreadable/malformed config, invalid system. Exit 1.
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            kind: "validation",
            message: message.into(),
            code: 1,
        }
    }

    /// Well-formed but unsolvable instance. Exit 2.
    pub fn infeasible(message: impl Into<String>) -> Self {
        CliError {
            kind: "infeasible",
            message: message.into(),
            code: 2,
        }
    }

    /// Reproduction check failed. Exit 3.
    pub fn acceptance(message: impl Into<String>) -> Self {
        CliError {
            kind: "acceptance",
            message: message.into(),
            code: 3,
        }
    }
}

impl From<SimulatorError> for CliError {
    fn from(err: SimulatorError) -> Self {
        match err {
            SimulatorError::Invalid(_) => CliError::validation(err.to_string()),
            _ => CliError::infeasible(err.to_string()),
        }
    }
}

impl From<usctec::load::LoadError> for CliError {
    fn from(err: usctec::load::LoadError) -> Self {
        CliError::infeasible(err.to_string())
    }
}

impl From<usctec::division::DivisionError> for CliError {
    fn from(err: usctec::division::DivisionError) -> Self {
        CliError::infeasible(err.to_string())
    }
}

impl From<usctec::placement::PlacementError> for CliError {
    fn from(err: usctec::placement::PlacementError) -> Self {
        CliError::infeasible(err.to_string())
    }
}

impl From<usctec::cyclic::CyclicError> for CliError {
    fn from(err: usctec::cyclic::CyclicError) -> Self {
        CliError::infeasible(err.to_string())
    }
}

impl From<usctec::coded::CodedError> for CliError {
    fn from(err: usctec::coded::CodedError) -> Self {
        CliError::infeasible(err.to_string())
    }
}

impl From<usctec::field::FieldError> for CliError {
    fn from(err: usctec::field::FieldError) -> Self {
        CliError::validation(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::validation(err.to_string())
    }
}
