use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("initial data must contain at least one piece")]
    EmptyData,
    #[error("piece {index}: {reason}")]
    InvalidPiece { index: usize, reason: String },
    #[error("piece {index} overlaps piece {other}")]
    Overlap { index: usize, other: usize },
    #[error("interval bounds reversed: {lo} > {hi}")]
    ReversedInterval { lo: f64, hi: f64 },
    #[error("time must be {expected}, got {t}")]
    BadTime { t: f64, expected: &'static str },
    #[error("relaxation time must be positive and finite, got {0}")]
    BadTau(f64),
    #[error("grid: {0}")]
    BadGrid(String),
    #[error("measure extraction near x = {x}: {reason}")]
    Extraction { x: f64, reason: String },
    #[error("empty relaxation-time list")]
    EmptyTaus,
    #[error("internal: {0}")]
    Internal(String),
    #[error("config: {0}")]
    Config(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
