use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the model, the samplers and the estimators.
///
/// Bin indices carried by variants are 1-based, matching the file formats.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bin edges must be strictly increasing (edge {index} is not above its predecessor)")]
    NonIncreasingEdges { index: usize },
    #[error("frequency of bin {bin} is negative")]
    NegativeFrequency { bin: usize },
    #[error("dataset is empty: total frequency is zero")]
    EmptyDataset,
    #[error("center of bin {bin} lies outside the bin")]
    CenterOutsideBin { bin: usize },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("at least two bin centers are needed to derive edges, found {0}")]
    TooFewCenters(usize),
    #[error("bin centers must be strictly increasing (center {index})")]
    NonIncreasingCenters { index: usize },
    #[error("total mass parameter must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("size {n} exceeds the enumeration limit of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("group has no observations")]
    EmptyGroup,
    #[error("empty truncation interval ({lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("truncation interval ({lo}, {hi}] carries no representable probability mass")]
    NumericalUnderflow { lo: f64, hi: f64 },
    #[error("invalid distribution parameters: {0}")]
    InvalidParams(String),
    #[error("no group with two or more elements to split")]
    NoSplittableGroup,
    #[error("partition has a single group")]
    SingleGroup,
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid chain state: {0}")]
    InvalidState(String),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("partition {0} was never visited by the chain")]
    PartitionNeverVisited(String),
    #[error("value {value} lies outside the binned range ({lo}, {hi}]")]
    ValueOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("numerical integration did not converge after {0} refinements")]
    NonConvergence(usize),
}
