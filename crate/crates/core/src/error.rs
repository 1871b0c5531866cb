use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("points must have dimension at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate in point {index}")]
    NonFinite { index: usize },

    #[error("neighbour count {k} outside 1..={n}")]
    NeighborCountOutOfRange { k: usize, n: usize },

    #[error("query {position}: {source}")]
    BatchQuery {
        position: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{points} points but {labels} labels")]
    LengthMismatch { points: usize, labels: usize },

    #[error("non-finite label at index {index}")]
    NonFiniteLabel { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("n={n}, m={m}, replicate={replicate}: {source}")]
    Experiment {
        n: usize,
        m: usize,
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
