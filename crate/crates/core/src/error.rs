use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter set must have at least one type and one arm (got {n_types}x{n_arms})")]
    EmptyParameterSet { n_types: usize, n_arms: usize },

    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },

    #[error("mean at type {x}, arm {a} is {value}, outside [0, 1]")]
    MeanOutOfRange { x: usize, a: usize, value: f64 },

    #[error("type {x} has a tied maximum (arms {first} and {second}); optimal arms must be unique")]
    TiedOptimum { x: usize, first: usize, second: usize },

    #[error("type index {x} out of range (N = {n_types})")]
    TypeOutOfRange { x: usize, n_types: usize },

    #[error("arm index {a} out of range (K = {n_arms})")]
    ArmOutOfRange { a: usize, n_arms: usize },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arm {0} has never been pulled")]
    UnpulledArm(usize),

    #[error("arm subset is empty")]
    EmptySubset,

    #[error("reward must be 0 or 1, got {0}")]
    InvalidReward(u8),

    #[error("KL divergence is infinite (p = {p}, q = {q})")]
    InfiniteDivergence { p: f64, q: f64 },

    #[error("need at least {clusters} points to form {clusters} clusters, got {points}")]
    TooFewPoints { points: usize, clusters: usize },

    #[error("exhaustive matching supports at most 10 clusters, got {0}")]
    MatchingTooLarge(usize),

    #[error("zero gap for elite arm {arm} under type {x}; the logarithmic term is undefined")]
    DegenerateGap { x: usize, arm: usize },

    #[error("confusion set of type {0} is empty; the lower bound is vacuous")]
    VacuousBound(usize),

    #[error("unknown user {0}")]
    UnknownUser(u64),

    #[error("true type required but not available for user {0}")]
    MissingType(u64),

    #[error("linear program failed: {0}")]
    Solver(String),
}
