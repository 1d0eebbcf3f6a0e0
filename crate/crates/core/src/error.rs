use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("degenerate surface")]
    DegenerateSurface,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("divergence: training loss became non-finite at epoch {epoch}; try a lower learning rate")]
    Divergence { epoch: usize },
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no contact")]
    NoContact,
    #[error("object not found within {travel_mm:.0} mm of travel")]
    ObjectNotFound { travel_mm: f64 },
    #[error("servo oscillation after {moves} moves")]
    ServoOscillation { moves: usize },
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("model format: {0}")]
    ModelFormat(String),
    #[error("io: {0}")]
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

pub type Result<T, E = Error> = std::result::Result<T, E>;
