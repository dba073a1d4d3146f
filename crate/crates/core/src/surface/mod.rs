//! Surface language: lexing, parsing and hygienic renaming of `.psc` sources.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod resolve;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use ast::SurfaceProgram;
pub use lexer::{tokenize, Tok, Token};
pub use parser::parse_program;
pub use resolve::{resolve_names, NameTable};

/// 1-based text coordinates of a token or AST node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn synthetic(file: &Arc<str>) -> Self {
        SourceSpan {
            file: file.clone(),
            line: 1,
            column: 1,
            length: 1,
        }
    }

    /// Smallest span covering both `self` and `other` when they share a line;
    /// otherwise `self`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        if self.file == other.file && self.line == other.line && other.column >= self.column {
            SourceSpan {
                length: (other.column + other.length - self.column).max(1),
                ..self.clone()
            }
        } else {
            self.clone()
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NameKind {
    Datatype,
    Constructor,
    Function,
    Variable,
    Typevar,
}

/// An identifier after renaming: the source text plus a unique suffix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HygienicName {
    pub base: Arc<str>,
    pub suffix: u32,
    pub kind: NameKind,
}

impl HygienicName {
    pub fn new(base: &str, suffix: u32, kind: NameKind) -> Self {
        HygienicName {
            base: Arc::from(base),
            suffix,
            kind,
        }
    }

    /// Internal form, `base'N`.
    pub fn internal(&self) -> String {
        format!("{}'{}", self.base, self.suffix)
    }

    /// Apostrophe-free form used in emitted theory text, `base_N`.
    pub fn rendered(&self) -> String {
        format!("{}_{}", self.base, self.suffix)
    }
}

impl fmt::Display for HygienicName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}'{}", self.base, self.suffix)
    }
}

impl fmt::Debug for HygienicName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}'{}", self.base, self.suffix)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("{span}: lexical error: {message}")]
    Lex { span: SourceSpan, message: String },
    #[error("{span}: syntax error: found {found}, expected one of: {}", expected.join(", "))]
    Syntax {
        span: SourceSpan,
        found: String,
        expected: Vec<String>,
    },
    #[error("{span}: {message}")]
    Unsupported { span: SourceSpan, message: String },
    #[error("{span}: unresolved name `{name}`")]
    Unresolved { span: SourceSpan, name: String },
    #[error("{span}: duplicate definition of `{name}`")]
    Duplicate { span: SourceSpan, name: String },
}

impl SurfaceError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            SurfaceError::Lex { span, .. }
            | SurfaceError::Syntax { span, .. }
            | SurfaceError::Unsupported { span, .. }
            | SurfaceError::Unresolved { span, .. }
            | SurfaceError::Duplicate { span, .. } => span,
        }
    }
}
