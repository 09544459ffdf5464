//! Reading and writing terms in standard syntax.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub mod lexer;
pub mod ops;
pub mod reader;
pub mod writer;

pub use lexer::Pos;
pub use ops::{default_ops, Fixity, OpDecl, OpDef, OpError, OpType, OperatorTable};
pub use reader::{read_all, read_query, read_sentence, Reader, Sentence};
pub use writer::{
    atom_needs_quotes, portray_clause, write_bound, write_goal_canonical, write_term, Spacing, VarStyle,
    WriteOptions,
};

/// A source region, lines and columns 1-based and inclusive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SourceSpan {
    pub module: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(module: Arc<str>, start: Pos, end: Pos) -> SourceSpan {
        SourceSpan {
            module,
            start_line: start.line,
            start_col: start.col,
            end_line: end.line,
            end_col: end.col,
        }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.module == other.module
            && (self.start_line, self.start_col) <= (other.start_line, other.start_col)
            && (other.end_line, other.end_col) <= (self.end_line, self.end_col)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}-{}:{}",
            self.module, self.start_line, self.start_col, self.end_line, self.end_col
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}
