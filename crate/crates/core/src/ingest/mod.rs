//! Bulk loading: OGB-style CSV files and seeded synthetic graphs.
//!
//! Both paths run single-threaded in store write mode and hold the writer
//! for their duration. Class targets are stored as the integer node property
//! `label`; the node type (PAPER etc.) is the LPG label — the two meanings
//! are deliberately kept apart.

mod csv_load;
mod sbm;

pub use csv_load::{load_csv, EdgeFileSpec, IngestSpec, LoadReport, NodeFileSpec};
pub use sbm::{generate_sbm, SbmSpec};

use std::path::PathBuf;

use thiserror::Error;

use crate::store::error::StoreError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file}:{line}: {msg}")]
    MalformedRow { file: PathBuf, line: u64, msg: String },
    #[error("{file}:{line}: unknown endpoint id `{id}` under label `{label}`")]
    UnknownEndpoint { file: PathBuf, line: u64, id: String, label: String },
    #[error("edge file {file}: endpoint label is ambiguous, specify src/dst labels")]
    AmbiguousEndpointLabel { file: PathBuf },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, IngestError>;

/// Tracks the largest class label seen, for `num_classes` in the catalog.
pub(crate) fn bump_num_classes(
    store: &crate::store::Store,
    max_label: i64,
) -> std::result::Result<(), StoreError> {
    let current = store
        .extra("num_classes")
        .and_then(|v| v.as_i64())
        .unwrap_or(0);
    let wanted = max_label + 1;
    if wanted > current {
        store.set_extra("num_classes", serde_json::json!(wanted))?;
    }
    Ok(())
}
