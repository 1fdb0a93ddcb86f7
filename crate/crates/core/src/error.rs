use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("adjacency matrix is not primitive")]
    NotPrimitive,

    #[error("word count {count} exceeds enumeration cap {cap}; use the DP oracle instead")]
    CapExceeded { count: String, cap: u64 },

    #[error("prefix too short: need {required} symbols, have {available}")]
    PrefixTooShort { required: usize, available: usize },

    #[error("symbol {symbol} occurrence {occurrence} not found within {horizon} positions")]
    SymbolExhausted {
        symbol: usize,
        occurrence: usize,
        horizon: usize,
    },

    #[error("sieve limit {limit} exceeds the memory budget of {budget} entries")]
    LimitTooLarge { limit: usize, budget: usize },

    #[error("potential is constant; the spectrum is a single point")]
    DegeneratePotential,

    #[error("alpha = {alpha} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain { alpha: f64, lo: f64, hi: f64 },

    #[error("DP state count {states} exceeds the configured limit {limit}")]
    BucketRangeOverflow { states: usize, limit: usize },

    #[error("minimization hit {iterations} iterations (best |grad| = {grad_norm:e}, value = {value})")]
    MaxIterations {
        iterations: usize,
        best: Vec<f64>,
        value: f64,
        grad_norm: f64,
    },
}
