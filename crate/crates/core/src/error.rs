use thiserror::Error;

/// Errors raised by the numerical and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {0} out of range for Pauli basis (expected 0..=3)")]
    IndexOutOfRange(usize),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("not a valid density operator: {0}")]
    InvalidState(String),
    #[error("coefficient a[0][0] must equal 1, got {0}")]
    BadNormalization(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("root not bracketed in [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("quadrature failed to converge on [{a}, {b}]")]
    QuadratureDiverged { a: f64, b: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("tomography input: {0}")]
    Tomography(String),
    #[error("record format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
