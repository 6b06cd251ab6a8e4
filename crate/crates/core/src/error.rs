use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol index {symbol} out of range for alphabet of size {size}")]
    InvalidWord { symbol: usize, size: usize },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("invalid automaton: {0}")]
    InvalidDfa(String),
    #[error("failed to generate a minimal {n}-state DFA after {attempts} attempts")]
    GenerationFailed { n: usize, attempts: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("empty class: {0}")]
    EmptyClass(&'static str),
    #[error("refinement would not change the partitioning: {0}")]
    NoOpRefinement(&'static str),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
