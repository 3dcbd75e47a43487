//! Lossless Kotlin tokenizer.
//!
//! Every byte of the input ends up in exactly one token, so concatenating the
//! token texts reproduces the source. String literals (including raw strings
//! and their `${...}` holes), char literals and nested block comments are
//! single tokens.

use serde::{Deserialize, Serialize};

use super::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Keyword,
    Identifier,
    Operator,
    StringLiteral,
    Number,
    Comment,
    Whitespace,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: u32,
    /// 1-based column (in characters) of the first character.
    pub column: u32,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl Token {
    pub fn is_trivia(&self) -> bool {
        matches!(self.kind, TokenKind::Whitespace | TokenKind::Comment)
    }

    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    /// Line of the last character of the token.
    pub fn end_line(&self) -> u32 {
        let newlines = self.text.bytes().filter(|&b| b == b'\n').count() as u32;
        if self.text.ends_with('\n') {
            self.line + newlines - 1
        } else {
            self.line + newlines
        }
    }

    pub fn end_offset(&self) -> usize {
        self.offset + self.text.len()
    }
}

pub const HARD_KEYWORDS: &[&str] = &[
    "as", "break", "class", "continue", "do", "else", "false", "for", "fun", "if", "in",
    "interface", "is", "null", "object", "package", "return", "super", "this", "throw", "true",
    "try", "typealias", "typeof", "val", "var", "when", "while",
];

const OPERATORS_3: &[&str] = &["===", "!==", "..<"];
const OPERATORS_2: &[&str] = &[
    "?.", "?:", "!!", "..", "::", "->", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=",
    "-=", "*=", "/=", "%=",
];

/// Tokenize raw bytes; fails only when the input is not valid UTF-8.
pub fn tokenize(source: &[u8]) -> Result<Vec<Token>, SyntaxError> {
    let text = std::str::from_utf8(source).map_err(|e| SyntaxError::Decode {
        path: String::new(),
        offset: e.valid_up_to(),
    })?;
    Ok(tokenize_str(text))
}

pub fn tokenize_str(text: &str) -> Vec<Token> {
    tokenize_at(text, 1, 1, 0)
}

/// Tokenize `text` as if it started at the given position of an enclosing
/// file. Used for the expression holes of string templates.
pub fn tokenize_at(text: &str, line: u32, column: u32, offset: usize) -> Vec<Token> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let mut cur_line = line;
    let mut cur_col = column;
    while pos < bytes.len() {
        let (kind, end) = next_token(text, pos);
        debug_assert!(end > pos);
        let slice = &text[pos..end];
        tokens.push(Token {
            kind,
            text: slice.to_string(),
            line: cur_line,
            column: cur_col,
            offset: offset + pos,
        });
        for ch in slice.chars() {
            if ch == '\n' {
                cur_line += 1;
                cur_col = 1;
            } else {
                cur_col += 1;
            }
        }
        pos = end;
    }
    tokens
}

fn next_token(text: &str, pos: usize) -> (TokenKind, usize) {
    let bytes = text.as_bytes();
    let b = bytes[pos];
    let rest = &bytes[pos..];
    if b.is_ascii_whitespace() {
        let mut end = pos;
        while end < bytes.len() && bytes[end].is_ascii_whitespace() {
            end += 1;
        }
        return (TokenKind::Whitespace, end);
    }
    if rest.starts_with(b"//") || (pos == 0 && rest.starts_with(b"#!")) {
        let end = memchr(b'\n', bytes, pos).unwrap_or(bytes.len());
        return (TokenKind::Comment, end);
    }
    if rest.starts_with(b"/*") {
        return (TokenKind::Comment, skip_block_comment(bytes, pos));
    }
    if b == b'"' {
        return (TokenKind::StringLiteral, skip_string(bytes, pos));
    }
    if b == b'\'' {
        return (TokenKind::Other, skip_char_literal(bytes, pos));
    }
    if b == b'`' {
        let end = match memchr(b'`', bytes, pos + 1) {
            Some(close) if !bytes[pos + 1..close].contains(&b'\n') => close + 1,
            _ => pos + 1,
        };
        let kind = if end > pos + 1 { TokenKind::Identifier } else { TokenKind::Other };
        return (kind, end);
    }
    if b.is_ascii_digit() || (b == b'.' && rest.len() > 1 && rest[1].is_ascii_digit() && !prev_is_dot(bytes, pos)) {
        return (TokenKind::Number, skip_number(bytes, pos));
    }
    if is_ident_start(text, pos) {
        let end = skip_ident(text, pos);
        let word = &text[pos..end];
        let kind = if HARD_KEYWORDS.contains(&word) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        return (kind, end);
    }
    for op in OPERATORS_3.iter().chain(OPERATORS_2) {
        if rest.starts_with(op.as_bytes()) {
            return (TokenKind::Operator, pos + op.len());
        }
    }
    if b.is_ascii_punctuation() {
        return (TokenKind::Operator, pos + 1);
    }
    // Any other character (control codes, stray unicode symbols).
    let ch_len = text[pos..].chars().next().map_or(1, char::len_utf8);
    (TokenKind::Other, pos + ch_len)
}

fn prev_is_dot(bytes: &[u8], pos: usize) -> bool {
    pos > 0 && bytes[pos - 1] == b'.'
}

fn memchr(needle: u8, bytes: &[u8], from: usize) -> Option<usize> {
    bytes[from..].iter().position(|&b| b == needle).map(|i| from + i)
}

fn is_ident_start(text: &str, pos: usize) -> bool {
    text[pos..]
        .chars()
        .next()
        .is_some_and(|c| c == '_' || c.is_alphabetic())
}

pub(crate) fn skip_ident(text: &str, pos: usize) -> usize {
    let mut end = pos;
    for c in text[pos..].chars() {
        if c == '_' || c.is_alphanumeric() {
            end += c.len_utf8();
        } else {
            break;
        }
    }
    end
}

fn skip_number(bytes: &[u8], pos: usize) -> usize {
    let mut i = pos;
    let len = bytes.len();
    if bytes[i] == b'0' && i + 1 < len && matches!(bytes[i + 1], b'x' | b'X' | b'b' | b'B') {
        i += 2;
        while i < len && (bytes[i].is_ascii_hexdigit() || bytes[i] == b'_') {
            i += 1;
        }
    } else {
        while i < len && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
            i += 1;
        }
        if i + 1 < len && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
            i += 1;
            while i < len && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                i += 1;
            }
        }
        if i < len && matches!(bytes[i], b'e' | b'E') {
            let mut j = i + 1;
            if j < len && matches!(bytes[j], b'+' | b'-') {
                j += 1;
            }
            if j < len && bytes[j].is_ascii_digit() {
                i = j;
                while i < len && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                    i += 1;
                }
            }
        }
    }
    while i < len && matches!(bytes[i], b'f' | b'F' | b'd' | b'D' | b'u' | b'U' | b'L') {
        i += 1;
    }
    i
}

/// Block comments nest in Kotlin. Unterminated comments run to end of input.
fn skip_block_comment(bytes: &[u8], pos: usize) -> usize {
    let mut depth = 0usize;
    let mut i = pos;
    while i < bytes.len() {
        if bytes[i..].starts_with(b"/*") {
            depth += 1;
            i += 2;
        } else if bytes[i..].starts_with(b"*/") {
            depth -= 1;
            i += 2;
            if depth == 0 {
                return i;
            }
        } else {
            i += 1;
        }
    }
    bytes.len()
}

fn skip_char_literal(bytes: &[u8], pos: usize) -> usize {
    let mut i = pos + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\'' => return i + 1,
            b'\n' => return i,
            _ => i += 1,
        }
    }
    bytes.len()
}

/// Returns the end offset (exclusive) of the string literal starting at `pos`.
pub(crate) fn skip_string(bytes: &[u8], pos: usize) -> usize {
    scan_nested(bytes, pos, Vec::new())
}

/// `start` points just after `${`; returns the offset just after the matching `}`.
pub(crate) fn skip_template_hole(bytes: &[u8], start: usize) -> usize {
    scan_nested(bytes, start, vec![Nest::Hole { braces: 1 }])
}

#[derive(Debug, Clone, Copy)]
enum Nest {
    Str { raw: bool },
    Hole { braces: usize },
}

/// Scans strings and template holes nested to any depth without recursion.
/// With an empty `stack`, `pos` must be at an opening quote.
fn scan_nested(bytes: &[u8], mut i: usize, mut stack: Vec<Nest>) -> usize {
    let open_string = |i: usize, stack: &mut Vec<Nest>| -> usize {
        if bytes[i..].starts_with(b"\"\"\"") {
            stack.push(Nest::Str { raw: true });
            i + 3
        } else {
            stack.push(Nest::Str { raw: false });
            i + 1
        }
    };
    if stack.is_empty() {
        i = open_string(i, &mut stack);
    }
    while i < bytes.len() {
        let top = *stack.last().expect("scanner stack is never empty here");
        match top {
            Nest::Str { raw: true } => {
                if bytes[i..].starts_with(b"\"\"\"") {
                    // The closing delimiter is the last three quotes of a run.
                    i += 3;
                    while i < bytes.len() && bytes[i] == b'"' {
                        i += 1;
                    }
                    stack.pop();
                } else if bytes[i..].starts_with(b"${") {
                    stack.push(Nest::Hole { braces: 1 });
                    i += 2;
                } else {
                    i += 1;
                }
            }
            Nest::Str { raw: false } => match bytes[i] {
                b'\\' => i += 2,
                b'"' => {
                    i += 1;
                    stack.pop();
                }
                // an unterminated single-line string ends before the line break
                b'\n' => {
                    stack.pop();
                    if stack.is_empty() {
                        return i;
                    }
                    i += 1;
                }
                b'$' if bytes.get(i + 1) == Some(&b'{') => {
                    stack.push(Nest::Hole { braces: 1 });
                    i += 2;
                }
                _ => i += 1,
            },
            Nest::Hole { braces } => match bytes[i] {
                b'{' => {
                    stack.pop();
                    stack.push(Nest::Hole { braces: braces + 1 });
                    i += 1;
                }
                b'}' => {
                    stack.pop();
                    if braces > 1 {
                        stack.push(Nest::Hole { braces: braces - 1 });
                    }
                    i += 1;
                }
                b'"' => i = open_string(i, &mut stack),
                b'\'' => i = skip_char_literal(bytes, i),
                b'/' if bytes.get(i + 1) == Some(&b'*') => i = skip_block_comment(bytes, i),
                b'/' if bytes.get(i + 1) == Some(&b'/') => {
                    i = memchr(b'\n', bytes, i).unwrap_or(bytes.len());
                }
                _ => i += 1,
            },
        }
        if stack.is_empty() {
            return i;
        }
    }
    bytes.len()
}
