use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// Pair indices are 1-based in the message, matching the report format.
    #[error("aircraft {i} and {j} are {distance} apart at t = 0, below the safety distance {d}")]
    InitialConflict { i: usize, j: usize, distance: f64, d: f64 },

    #[error("invalid pair ({i}, {j}) for an instance of {n} aircraft")]
    InvalidPair { i: usize, j: usize, n: usize },

    #[error("heading deviation for aircraft {index} is {value}, outside [{lo}, {hi}]")]
    OutOfBounds { index: usize, value: f64, lo: f64, hi: f64 },

    #[error("heading vector has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty box: interval {index} has lower bound {lo} above upper bound {hi}")]
    EmptyBox { index: usize, lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no feasible point found after {retries} retries")]
    RetriesExhausted { retries: usize },

    #[error("no feasible point found from this start")]
    NoFeasiblePoint,

    #[error("missing BigM bundle for pair ({i}, {j})")]
    MissingBigM { i: usize, j: usize },

    #[error("cannot export: {0}")]
    Unsupported(String),

    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("oracle horizon {horizon} is shorter than the closest-approach time {t} of pair ({i}, {j})")]
    HorizonTooShort { horizon: f64, t: f64, i: usize, j: usize },

    #[error("malformed file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
