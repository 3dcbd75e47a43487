//! Lossless Kotlin lexer and island parser.

mod lexer;
mod parser;
mod tree;

use thiserror::Error;

pub use lexer::{tokenize, tokenize_at, tokenize_str, Token, TokenKind, HARD_KEYWORDS};
pub use parser::{parse, Scope, MODIFIERS};
pub use tree::{count_lloc, physical_lines, Attributes, NodeKind, SourceTree, Span, SyntaxNode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{path}: invalid UTF-8 at byte {offset}")]
    Decode { path: String, offset: usize },
}

/// Tokenizes and parses one file.
pub fn parse_source(path: &str, source: &[u8]) -> Result<SourceTree, SyntaxError> {
    let tokens = tokenize(source).map_err(|e| match e {
        SyntaxError::Decode { offset, .. } => SyntaxError::Decode { path: path.to_string(), offset },
    })?;
    Ok(parse(tokens, path))
}
