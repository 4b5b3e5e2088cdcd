use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("parse error at line {line}: {msg}")]
    ParseAt { line: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violation for {key}: {msg}")]
    Invariant { key: String, msg: String },

    #[error("zero list does not cover the requested range: {0}")]
    Coverage(String),

    #[error("margin enclosure straddles zero: indeterminate, raise precision")]
    Indeterminate,

    #[error("negative radicand in L2 norm closed form (parity or overflow fault)")]
    NegativeRadicand,

    #[error("no feasible point found: {0}")]
    NoFeasiblePoint(String),

    #[error("degenerate regression input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
