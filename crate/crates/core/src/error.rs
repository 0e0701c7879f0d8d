use std::fmt;

/// One failed density-matrix check, with the measured size of the violation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape { rows: usize, cols: usize, expected: usize },
    NonFinite,
    NotHermitian { max_deviation: f64 },
    Trace { trace: f64 },
    Negative { min_eigenvalue: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { rows, cols, expected } => {
                write!(f, "shape {rows}x{cols}, expected {expected}x{expected}")
            }
            Violation::NonFinite => write!(f, "non-finite entries"),
            Violation::NotHermitian { max_deviation } => {
                write!(f, "not Hermitian (max |m - m^dagger| = {max_deviation:.3e})")
            }
            Violation::Trace { trace } => write!(f, "trace {trace:.12} differs from 1"),
            Violation::Negative { min_eigenvalue } => {
                write!(f, "negative eigenvalue {min_eigenvalue:.3e}")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("unsupported number of copies {0}")]
    UnsupportedCopies(usize),

    #[error("not a permutation of 0..{len}: {perm:?}")]
    BadPermutation { perm: Vec<usize>, len: usize },

    #[error("invalid state: {}", join_violations(.0))]
    InvalidState(Vec<Violation>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("two computations of {quantity} disagree by {delta:.3e}")]
    Inconsistent { quantity: &'static str, delta: f64 },

    #[error("state file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
