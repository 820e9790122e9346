use thiserror::Error;

pub type Result<T> = std::result::Result<T, RifleError>;

/// Every failure the library can report.
///
/// Variants split into two families: input validation problems (bad shapes,
/// bad configuration, malformed files) and numerical failures (singular
/// pencils, degenerate iterates). [`RifleError::is_validation`] tells them
/// apart so front ends can map them to distinct exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RifleError {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("degenerate Rayleigh quotient denominator or numerator ({value:e})")]
    DegenerateDenominator { value: f64 },

    #[error("update vector vanished")]
    ZeroUpdate,

    #[error("iterate became non-finite at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("zero vector")]
    ZeroVector,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid warm-start schedule: {0}")]
    InvalidSchedule(String),

    #[error("enumeration too large: C({dim}, {size}) subsets exceeds the oracle cap")]
    TooLarge { dim: usize, size: usize },

    #[error("every support of size {size} gave a singular restricted B")]
    AllSupportsSingular { size: usize },

    #[error("restricted eigengap is not positive")]
    ZeroGap,

    #[error("class {class} has {count} samples")]
    DegenerateClass { class: usize, count: usize },

    #[error("slice {slice} is empty")]
    EmptySlice { slice: usize },

    #[error("dimension {dim} is not divisible into {blocks} blocks")]
    Indivisible { dim: usize, blocks: usize },

    #[error("problem too small: {0}")]
    TooSmall(String),

    #[error("{n} samples cannot be split into {folds} folds")]
    TooFewSamples { n: usize, folds: usize },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl RifleError {
    /// True for errors caused by malformed input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        use RifleError::*;
        matches!(
            self,
            DimMismatch { .. }
                | NotSquare { .. }
                | IndexOutOfRange { .. }
                | NonFinite(_)
                | InvalidConfig(_)
                | InvalidSchedule(_)
                | TooLarge { .. }
                | DegenerateClass { .. }
                | EmptySlice { .. }
                | Indivisible { .. }
                | TooSmall(_)
                | TooFewSamples { .. }
                | Parse { .. }
                | Io(_)
                | InvalidInput(_)
        )
    }
}

impl From<std::io::Error> for RifleError {
    fn from(e: std::io::Error) -> Self {
        RifleError::Io(e.to_string())
    }
}
