//! The query layer: tokenizer, parser, binder, planner, pull-based executor
//! and PROFILE support.

pub mod ast;
pub mod bind;
pub mod exec;
pub mod parser;
pub mod plan;
pub mod profile;
pub mod token;
pub mod value;

pub use bind::{bind, BoundQuery};
pub use parser::parse;
pub use value::Value;

use thiserror::Error;

use crate::store::error::StoreError;
use token::Pos;

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("syntax error at {line}:{col}: expected {expected}, found {found}")]
    Syntax { line: u32, col: u32, expected: String, found: String },
    #[error("missing parameter ${0}")]
    MissingParameter(String),
    #[error("parameter ${name} must be {expected}")]
    ParamTypeMismatch { name: String, expected: &'static str },
    #[error("variable `{0}` is not bound by an earlier clause")]
    UnboundVariable(String),
    #[error("expression `{0}` in WITH must be aliased")]
    NotAliased(String),
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
    #[error("type error: {0}")]
    TypeError(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl QueryError {
    pub(crate) fn syntax(pos: Pos, expected: &str, found: &str) -> QueryError {
        QueryError::Syntax {
            line: pos.line,
            col: pos.col,
            expected: expected.to_owned(),
            found: found.to_owned(),
        }
    }
}

pub type Result<T> = std::result::Result<T, QueryError>;
