use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every way an input can violate the model.
///
/// Messages name the violated invariant so the CLI can print them verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("n_nodes must be at least 1")]
    NoNodes,
    #[error("file_blocks must be at least 1")]
    NoFileBlocks,
    #[error("redundancy m must be at least 1")]
    NoRedundancy,
    #[error(
        "redundancy m = {m} exceeds n_nodes N = {n}: minimal spreading needs m nonempty nodes"
    )]
    RedundancyExceedsNodes { m: u32, n: u32 },
    #[error("node rate mu must be positive, got {0}")]
    NonPositiveRate(String),
    #[error("access size r = {r} outside [1, N = {n}]")]
    AccessSizeOutOfRange { r: u32, n: u32 },
    #[error("access-failure probability p = {0} outside [0, 1]")]
    ProbabilityOutOfRange(String),
    #[error("alpha must be at least 1")]
    ZeroAlpha,
    #[error("alpha = {alpha} exceeds r = {r}: recovery is impossible")]
    AlphaExceedsAccessSize { alpha: u32, r: u32 },
    #[error("alpha = {alpha} needs beta = m*alpha = {beta} nonempty nodes but only N = {n} exist")]
    BetaExceedsNodes { alpha: u32, beta: u64, n: u32 },
    #[error("recovery needs k >= alpha, got k = {k}, alpha = {alpha}")]
    TooFewDataNodes { k: u32, alpha: u32 },
    #[error("upper bound is stated for alpha >= 2, got alpha = {0}")]
    BoundNeedsAlphaTwo(u32),
    #[error("allocation has {got} entries, expected N = {n}")]
    AllocationLength { got: usize, n: u32 },
    #[error("node {index} stores {blocks} blocks, outside [0, F = {file_blocks}]")]
    NodeBlocksOutOfRange {
        index: usize,
        blocks: String,
        file_blocks: u64,
    },
    #[error("allocation stores {total} blocks in total, budget T = m*F = {budget}")]
    BudgetMismatch { total: String, budget: String },
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("N = {n} exceeds the enumeration guard of {max} nodes")]
    EnumerationTooLarge { n: u32, max: u32 },
    #[error("invalid distribution parameters: {0}")]
    InvalidDistribution(String),
    #[error("cannot parse {input:?} as a number: {reason}")]
    Parse { input: String, reason: String },
    #[error("trials must be at least 1")]
    NoTrials,
}
