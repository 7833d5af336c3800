use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: invalid item id {token:?}")]
    InvalidItem { line: usize, token: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("observed itemset collection is empty")]
    EmptyObserved,

    #[error("partial counts cover different observed itemsets")]
    MismatchedObserved,

    #[error("need at least {needed} estimates, have {available}")]
    NotEnoughEstimates { needed: usize, available: usize },

    #[error("item universe has {items} items; at most {limit} are supported")]
    UniverseTooLarge { items: usize, limit: usize },

    #[error("sample has {n} transactions; exact enumeration supports at most {limit}")]
    SampleTooLarge { n: usize, limit: usize },

    #[error("dataset has {available} distinct items, fewer than k = {k}")]
    TooFewItems { k: usize, available: usize },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
