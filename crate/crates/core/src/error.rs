use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("relations imply a cycle through element {0}")]
    Cycle(usize),
    #[error("element index {index} out of range for a poset of {n} elements")]
    Index { index: usize, n: usize },
    #[error("poset has no remaining elements")]
    EmptyPoset,
    #[error("element {0} was already deleted")]
    AlreadyDeleted(usize),
    #[error("element {0} is not maximal")]
    NotMaximal(usize),
    #[error("poset is not a forest")]
    NotForest,
    #[error("{what} = {actual} exceeds the configured limit of {limit}")]
    SizeLimit {
        what: &'static str,
        actual: u128,
        limit: u128,
    },
    #[error("importance undefined for d = {d} with {remaining} elements remaining")]
    Domain { d: usize, remaining: usize },
    #[error("sequence is not a linear extension: {0}")]
    InvalidExtension(String),
    #[error("importance weight for element {0} is not a positive finite number")]
    NonPositiveWeight(usize),
    #[error("importance table has {got} entries, poset has {want} elements")]
    TableSize { got: usize, want: usize },
    #[error("{0}")]
    Usage(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
