use std::path::PathBuf;

use thiserror::Error;

use crate::design::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{func}: argument out of domain ({detail})")]
    Domain { func: &'static str, detail: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Non-positive pivot while factoring XᵀWX. `label` is filled in once the
    /// column is known by name (the linear algebra layer only sees indices).
    #[error("design matrix is rank deficient at column {}", label.as_deref().map(str::to_owned).unwrap_or_else(|| column.to_string()))]
    RankDeficient { column: usize, label: Option<String> },

    #[error("row {row}: variable `{variable}` has unknown level `{value}`")]
    UnknownLevel {
        row: usize,
        variable: String,
        value: String,
    },

    #[error("variable `{0}` is not present in the dataset")]
    MissingVariable(String),

    #[error("invalid variable spec `{name}`: {detail}")]
    InvalidSpec { name: String, detail: String },

    #[error("degenerate contingency table: {0} has no observations")]
    DegenerateTable(String),

    #[error("dataset failed validation ({} violation(s)): {}", .0.len(), join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
