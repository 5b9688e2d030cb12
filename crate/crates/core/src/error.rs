use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value out of range: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension {0}, expected 2 or 3")]
    Dimension(usize),

    #[error("frequency set too large: N = {size} exceeds cap {cap}")]
    Size { size: usize, cap: usize },

    #[error("grid resolution {grid} too small, need more than {required:.3}")]
    Resolution { grid: usize, required: f64 },

    #[error("series did not converge within {0} terms")]
    Convergence(usize),

    #[error("missing dependency: {0}")]
    Dependency(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
