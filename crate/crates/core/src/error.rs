use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed game: {0}")]
    MalformedGame(String),

    #[error("strategy does not match the game: {0}")]
    StrategyMismatch(String),

    /// The requested exact computation exceeds its budget. Callers should
    /// fall back to local search or a heuristic.
    #[error("intractable: {what} needs {required} units, budget is {budget}")]
    Intractable { what: String, required: u128, budget: u128 },

    #[error("operator is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),

    #[error("observable is not a ±1 observable (deviation {0:e})")]
    NotAnObservable(f64),

    #[error("state is not normalised (norm² = {0})")]
    NotNormalised(f64),

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("vertices {0} and {1} are in different components")]
    Disconnected(usize, usize),

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("sampling aborted: {accepted} of {attempts} attempts accepted")]
    SamplingAborted { attempts: u64, accepted: u64 },

    #[error("every sample was degenerate ({0} samples)")]
    AllDegenerate(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
