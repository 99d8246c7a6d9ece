//! Textual interchange: the `.scl` submission format, schema and profile
//! documents (all parenthesized symbolic expressions), and the one-line
//! query language.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub mod profile;
pub mod query;
pub mod schema_text;
pub mod sexp;
pub mod submission;

pub use profile::{parse_profiles, print_profile};
pub use query::{parse_query, Query};
pub use schema_text::{parse_schema, print_schema};
pub use submission::{
    parse_submission, print_submission, ArticleDecl, ClaimDecl, ElementDecl, RelationGroup,
    Submission, Target,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub fn new(line: usize, col: usize) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Source position carried by AST nodes. It never takes part in equality, so
/// a printed-then-reparsed value compares equal to the original.
#[derive(Debug, Clone, Copy, Default)]
pub struct Loc(pub Pos);

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Loc {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Syntax,
    UnbalancedParens,
    UnknownLink,
    UnknownKind,
    UnknownVariant,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::UnbalancedParens => "unbalanced parentheses",
            ErrorKind::UnknownLink => "unknown link",
            ErrorKind::UnknownKind => "unknown kind",
            ErrorKind::UnknownVariant => "unknown query variant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{line}:{col}: {kind}: {message}")]
pub struct DslError {
    pub kind: ErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl DslError {
    pub fn new(kind: ErrorKind, pos: Pos, message: impl Into<String>) -> Self {
        DslError {
            kind,
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    pub fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }
}

pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> DslError {
    DslError::new(ErrorKind::Syntax, pos, message)
}
