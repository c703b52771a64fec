use thiserror::Error;

/// Errors raised by the field, Wick, estimator and scan layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}: only d = 1, 2, 3 are supported")]
    UnsupportedDimension(usize),

    #[error("lattice for d = {d}, N = {cutoff} has {modes} modes, above the budget of {budget}")]
    LatticeBudget { d: usize, cutoff: u32, modes: u64, budget: u64 },

    #[error("grid size {grid} is below the dealiasing bound 4N + 1 = {required} (N = {cutoff})")]
    Dealiasing { grid: usize, required: usize, cutoff: u32 },

    #[error("cutoff {requested} exceeds the field cutoff {available}")]
    CutoffTooLarge { requested: u32, available: u32 },

    #[error("negative cutoff {0}")]
    NegativeCutoff(i64),

    #[error("dyadic block index must be at least 1, got {0}")]
    BlockIndex(u32),

    #[error("Hermite degree {0} is not supported (0 <= k <= 4)")]
    HermiteDegree(u32),

    #[error("variance parameter built for (d = {sigma_d}, N = {sigma_n}) applied to a field with (d = {field_d}, N = {field_n})")]
    VarianceMismatch { sigma_d: usize, sigma_n: u32, field_d: usize, field_n: u32 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("quadruple-sum budget exceeded: {modes} modes, estimated cost {cost} operations (budget {budget} modes)")]
    SumBudget { modes: u64, cost: u64, budget: u64 },

    #[error("weight overflow at stream {stream}: exponent {exponent} leaves no finite second moment; lower the cap L")]
    Overflow { stream: u64, exponent: f64 },

    #[error("profile scale M = {0} is below 4")]
    ProfileScale(u32),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot write output: {0}")]
    Io(String),

    #[error("at least {required} rows are needed, got {got}")]
    InsufficientRows { required: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
