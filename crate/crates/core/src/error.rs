use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("basis of size {size} exceeds the configured cap of {cap} monomials")]
    BasisTooLarge { size: u128, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at coordinate {coord}")]
    NonFinite { coord: usize, value: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("degenerate box: axis {axis} has zero or negative length")]
    DegenerateBox { axis: usize },

    #[error(
        "moment matrix is numerically singular (pivot {pivot} of {size}); \
         more samples than basis size or a ridge are needed"
    )]
    SingularMatrix { pivot: usize, size: usize },

    #[error("ridge escalation reached {ridge:e} without a successful factorization")]
    RidgeExhausted { ridge: f64 },

    #[error("KKT system is singular")]
    SingularKkt,

    #[error("multidegree {0:?} is not in the basis")]
    NotInBasis(Vec<u32>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no degree up to the cap {cap} satisfies the threshold condition")]
    DegreeCapExceeded { cap: u32 },

    #[error("level {level} outside (0, {sup})")]
    LevelOutOfRange { level: f64, sup: f64 },

    #[error("labels are required")]
    MissingLabels,

    #[error("labels contain a single class")]
    SingleClass,

    #[error("point set is empty")]
    EmptySet,

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_row(self, row: usize) -> Self {
        Error::Row {
            row,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
