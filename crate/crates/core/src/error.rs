//! Error type shared by the core algorithms.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by core operations.
///
/// Dimension mismatches and out-of-range arguments are programming errors and
/// panic instead; this type covers conditions a caller can reasonably hit
/// with well-formed code (degenerate numerics, failed attack preconditions).
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A scalar function produced a NaN or infinity where a finite value was required.
    NonFinite { context: String },
    /// PGD could not produce a fooling perturbation within the restart budget.
    EndpointFailure { attempts: usize },
    /// A dataset-driven operation received an empty dataset.
    EmptyDataset,
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::NonFinite { context } => {
                write!(f, "non-finite value encountered in {context}")
            }
            CoreError::EndpointFailure { attempts } => {
                write!(f, "no fooling perturbation found after {attempts} restart attempts")
            }
            CoreError::EmptyDataset => write!(f, "dataset is empty"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}
