use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rate r[{map}][{coord}] = {value} is outside 0 < |r| < 1")]
    RateOutOfRange { map: usize, coord: usize, value: String },

    #[error("bad probability vector: {0}")]
    BadWeights(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("symbol {symbol} out of range for an alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("coordinate set is empty")]
    EmptyCoordinateSet,

    #[error("coordinate {coord} out of range for dimension {dim}")]
    CoordinateOutOfRange { coord: usize, dim: usize },

    #[error("negative argument {0}")]
    NegativeArgument(f64),

    #[error("root finder did not converge: {0}")]
    NoConvergence(String),

    #[error("operation requires d = 2, got d = {0}")]
    NotPlanar(usize),

    #[error("affinity dimension {0} is not in (0, 2)")]
    DegenerateAffinity(f64),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("enumeration of {requested} items exceeds the budget of {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },

    #[error("sampling depth {depth} is too shallow: r_max^depth = {achieved:e} must be below {required:e}")]
    InsufficientDepth { depth: usize, achieved: f64, required: f64 },

    #[error("block containing the query point has zero mass")]
    ZeroMassBlock,

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("class {0} has zero mass")]
    ZeroMassClass(usize),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("bad translations: {0}")]
    BadTranslations(String),

    #[error("dimension {0} exceeds the supported maximum of {max}", max = crate::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("cannot parse number {0:?}")]
    ParseNumber(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
