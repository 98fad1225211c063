//! Error type shared by all modules of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: entry ({row},{col}) deviates from its conjugate by {deviation:.3e}")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("matrix is not symmetric: entries ({row},{col})/({col},{row}) differ by {deviation:.3e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("eigensolver failed to converge after {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("matrix is not unitary: max deviation from U U\u{2020} = I is {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("amplitudes have norm {norm} but must be within {tolerance:e} of 1")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("density matrix has trace {trace} (must be 1 within {tolerance:e})")]
    NonUnitTrace { trace: f64, tolerance: f64 },

    #[error("eigenvalue {value:.3e} is negative beyond tolerance for a positive-semidefinite construct")]
    NegativeEigenvalue { value: f64 },

    #[error("correlation entry T[{j},{k}] has imaginary part {imag:.3e}")]
    ImaginaryCorrelation { j: usize, k: usize, imag: f64 },

    #[error("direction vector {name} has norm {norm} (must be 1 within {tolerance:e})")]
    NotUnitDirection {
        name: &'static str,
        norm: f64,
        tolerance: f64,
    },

    #[error("CKW inequality violated: residual tangle {tau:.3e}")]
    CkwViolation { tau: f64 },

    #[error("the two pairs of an ordering comparison must differ")]
    SamePair,

    #[error("Pauli axis {axis} out of range (must be 1, 2 or 3)")]
    BadAxis { axis: u8 },

    #[error("incomplete count data: missing settings {missing:?}")]
    MissingSettings { missing: Vec<(u8, u8, u8)> },

    #[error("setting ({j},{k},{l}) has zero total count")]
    ZeroTotalCount { j: u8, k: u8, l: u8 },

    #[error("unknown statistic {0:?}")]
    UnknownStatistic(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Parse-class errors come from reading external files; everything else
    /// is a contract or data problem from in-process values.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }

    pub fn is_incomplete_data(&self) -> bool {
        matches!(
            self,
            Error::MissingSettings { .. } | Error::ZeroTotalCount { .. }
        )
    }
}
