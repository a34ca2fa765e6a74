use thiserror::Error;

/// Errors produced by the optimizer, the benchmark suite and the harness.
#[derive(Debug, Error)]
pub enum EodeError {
    #[error("fitness budget exhausted ({used}/{cap} evaluations)")]
    BudgetExhausted { used: u64, cap: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown benchmark problem index {0} (valid: 1-20)")]
    UnknownProblem(usize),

    #[error("cannot aggregate an empty list of runs")]
    EmptyRuns,

    #[error("grid oracle supports at most 3 dimensions, got {0}")]
    DimensionTooHigh(usize),

    #[error("nearest-better tree needs at least 2 individuals, got {0}")]
    PopulationTooSmall(usize),

    #[error("species of size {size} is too small for this operator (needs {needed})")]
    SpeciesTooSmall { size: usize, needed: usize },

    #[error("success set is empty")]
    EmptySuccessSet,

    #[error("statistic needs at least 2 members, got {0}")]
    TooFewMembers(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, EodeError>;
