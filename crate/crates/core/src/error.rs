use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(String),

    #[error("spectra overlap: min |mu_i + nu_j| = {separation:e} below {tolerance:e}")]
    SpectralOverlap { separation: f64, tolerance: f64 },

    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {threshold:e}")]
    NotHermitian { asymmetry: f64, threshold: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("evaluation at {point} is within {distance:e} of a pole")]
    PoleProximity { point: Complex64, distance: f64 },

    #[error("denominator is singular at {point}: smallest singular value {sigma_min:e}")]
    SingularDenominator { point: Complex64, sigma_min: f64 },

    #[error("invalid projection: {0}")]
    InvalidProjection(String),

    #[error("invalid free parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("contour error: {0}")]
    Contour(String),

    #[error("winding number failure: {0}")]
    Winding(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn mismatch(
        context: impl Into<String>,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected: expected.into(),
            found: found.into(),
        }
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
