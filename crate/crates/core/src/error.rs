use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: value {value} outside attained range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("near-null frame: |v1| = {v1} exceeds cap {cap}; the worldline bounds diverge")]
    NearNull { v1: f64, cap: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
