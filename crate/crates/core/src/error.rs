use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("soliton parameters a={a}, b={b} give a non-decaying kernel (need a + b > 0)")]
    NonDecayingSoliton { a: f64, b: f64 },

    #[error("scattering data needs at least one soliton component")]
    EmptyScatteringData,

    #[error("cannot parse soliton list {input:?}: {reason}")]
    SolitonParse { input: String, reason: String },

    #[error("invalid quadrature parameters: {0}")]
    InvalidQuadrature(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("matrix shape mismatch: {0}")]
    Shape(String),

    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix is singular (zero pivot at column {pivot})")]
    Singular { pivot: usize },

    #[error("GLM system singular at (x, y, t) = ({x}, {y}, {t}), zero pivot at column {pivot}")]
    SingularGlm {
        x: f64,
        y: f64,
        t: f64,
        pivot: usize,
    },

    #[error("kernel overflowed at (x, y, t) = ({x}, {y}, {t})")]
    NonFiniteKernel { x: f64, y: f64, t: f64 },

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("transform size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("split-step integration went non-finite at step {step}")]
    Unstable { step: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
