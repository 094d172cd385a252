use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has dimension zero")]
    Empty,

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive-definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error(
        "transform is numerically singular (smallest singular value {min_singular_value:.3e})"
    )]
    SingularTransform { min_singular_value: f64 },

    #[error("matrix is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("spectrum is not real: offending eigenvalues {}", format_eigenvalues(.eigenvalues))]
    ComplexSpectrum { eigenvalues: Vec<Complex64> },

    #[error("matrix is not diagonalizable (condition estimate {condition:.3e}, eigen-residual {residual:.3e})")]
    NonDiagonalizable { condition: f64, residual: f64 },

    #[error("candidate Hermitian equivalent fails the Hermiticity gate (relative residual {residual:.3e})")]
    NotHermitianEquivalent { residual: f64 },

    #[error("identity `{identity}` violated: residual {residual:.3e} exceeds {tolerance:.3e}")]
    ResidualExceeded {
        identity: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("matrix dimension {dim} exceeds the configured maximum {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("invalid cluster partition: {0}")]
    InvalidPartition(String),

    #[error("invalid model parameters: {0}")]
    InvalidModelParameters(String),

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable variant name used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::Empty => "Empty",
            Error::NonFinite { .. } => "NonFinite",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::SingularTransform { .. } => "SingularTransform",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::ComplexSpectrum { .. } => "ComplexSpectrum",
            Error::NonDiagonalizable { .. } => "NonDiagonalizable",
            Error::NotHermitianEquivalent { .. } => "NotHermitianEquivalent",
            Error::ResidualExceeded { .. } => "ResidualExceeded",
            Error::TooLarge { .. } => "TooLarge",
            Error::InvalidPartition(_) => "InvalidPartition",
            Error::InvalidModelParameters(_) => "InvalidModelParameters",
            Error::InvalidTolerances(_) => "InvalidTolerances",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}

fn format_eigenvalues(values: &[Complex64]) -> String {
    values
        .iter()
        .map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im))
        .collect::<Vec<_>>()
        .join(", ")
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
