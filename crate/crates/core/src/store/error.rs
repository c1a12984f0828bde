use std::path::PathBuf;

use thiserror::Error;

use super::NodeId;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store is read-only")]
    ReadOnly,
    #[error("write attempted while {0} read transaction(s) are open")]
    WriteWhileRead(usize),
    #[error("node must have at least one label")]
    EmptyLabels,
    #[error("unknown node {0:?}")]
    UnknownNode(NodeId),
    #[error("unknown edge id {0}")]
    UnknownEdge(u64),
    #[error("duplicate id property `{id}` under label `{label}`")]
    DuplicateId { label: String, id: String },
    #[error("no index on ({label}, {key})")]
    IndexNotFound { label: String, key: String },
    #[error("vector property `{key}` has dimension {got}, label `{label}` expects {expected}")]
    VectorDimMismatch { label: String, key: String, expected: usize, got: usize },
    #[error("cannot compare {left} with {right}")]
    TypeMismatch { left: &'static str, right: &'static str },
    #[error("corrupt store: {0}")]
    Corrupt(&'static str),
    #[error("store directory {0} already contains a graph")]
    AlreadyExists(PathBuf),
    #[error("no graph found in {0}")]
    NotFound(PathBuf),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("meta.json: {0}")]
    Meta(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, StoreError>;
