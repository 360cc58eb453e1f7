//! Error taxonomy shared by every module.
//!
//! Errors are grouped into four classes that the command-line front end maps
//! onto process exit codes: input/structure problems (`2`), numerical
//! non-convergence or under-resolution (`3`), and spectral singularities such
//! as gap closures or kernels met without a tolerance policy (`4`).

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input or a violated precondition (wrong shape, matrix not
    /// Hermitian/skew/unitary within tolerance, invalid parameter value...).
    #[error("validation: {0}")]
    Validation(String),

    /// A structural identity that the construction promises failed to hold.
    /// `residual` is the measured deviation, `tolerance` the promised bound.
    #[error(
        "structural identity `{identity}` violated: residual {residual:.3e} > {tolerance:.3e}"
    )]
    Structure {
        identity: String,
        residual: f64,
        tolerance: f64,
    },

    /// A constructive recipe was handed incompatible ingredients
    /// (e.g. bump profiles that do not satisfy the projection constraints).
    #[error("construction: {0}")]
    Construction(String),

    /// An iterative or extrapolated numerical procedure failed to settle.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// The requested grid/cutoff cannot resolve the object (phase jumps,
    /// ambiguous branch, eigenvector tracking loss). A finer grid may help.
    #[error("resolution: {0} (try a finer grid or larger cutoff)")]
    Resolution(String),

    /// A singular operator where an invertible one is required, or a kernel
    /// encountered without an explicit tolerance policy.
    #[error("singular: {0}")]
    Singular(String),

    /// The spectral gap protecting the computation closed.
    #[error("gap closure: {context} (gap {gap:.3e})")]
    GapClosure { context: String, gap: f64 },
}

impl Error {
    /// Process exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Structure { .. } | Error::Construction(_) => 2,
            Error::NonConvergence(_) | Error::Resolution(_) => 3,
            Error::Singular(_) | Error::GapClosure { .. } => 4,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
