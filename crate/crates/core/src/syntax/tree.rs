use serde::{Deserialize, Serialize};

use super::lexer::{Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    /// File-level container; only ever the root.
    File,
    ClassDecl,
    ObjectDecl,
    CompanionObjectDecl,
    FunctionDecl,
    ConstructorDecl,
    PropertyDecl,
    VariableDecl,
    DestructuringDecl,
    LambdaExpr,
    CallExpr,
    CallArgument,
    BinaryOp,
    UnaryPostfixOp,
    WhenExpr,
    StringLiteral,
    StringTemplateEntry,
    TypeAliasDecl,
    SuperTypeEntry,
    Modifier,
    Block,
    Other,
}

/// Inclusive line range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start_line: u32,
    pub end_line: u32,
}

impl Span {
    pub fn new(start_line: u32, end_line: u32) -> Self {
        Span { start_line, end_line: end_line.max(start_line) }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start_line <= other.start_line && other.end_line <= self.end_line
    }

    pub fn union(&self, other: &Span) -> Span {
        Span {
            start_line: self.start_line.min(other.start_line),
            end_line: self.end_line.max(other.end_line),
        }
    }
}

/// Per-kind attributes. Only the fields meaningful for a node's kind are set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attributes {
    pub name: Option<String>,
    pub receiver_type: Option<String>,
    /// Operator text for `BinaryOp`/`UnaryPostfixOp`, keyword for control-flow `Other` nodes.
    pub operator: Option<String>,
    pub has_initializer: bool,
    pub has_type_annotation: bool,
    /// Declared with a `by` clause (property or supertype delegation).
    pub delegated: bool,
    /// Number of parameters carrying a default value (functions and constructors).
    pub default_params: u32,
    /// `name = value` call argument.
    pub named: bool,
    /// Trailing lambda argument written after the parentheses.
    pub trailing: bool,
    /// Declared inside a function, lambda, accessor or initializer body.
    pub local: bool,
    /// `object : T {}` expression rather than a declaration.
    pub literal: bool,
    pub interface: bool,
    pub components: u32,
    /// Identifiers known to have passed an `is` check for this subtree.
    pub guards: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxNode {
    pub kind: NodeKind,
    pub span: Span,
    pub attrs: Attributes,
    pub children: Vec<SyntaxNode>,
}

impl SyntaxNode {
    pub fn new(kind: NodeKind, span: Span) -> Self {
        SyntaxNode { kind, span, attrs: Attributes::default(), children: Vec::new() }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.attrs.name = Some(name.into());
        self
    }

    pub fn with_operator(mut self, op: impl Into<String>) -> Self {
        self.attrs.operator = Some(op.into());
        self
    }

    /// Adds children and widens the span so that it covers them.
    pub fn push_children(&mut self, children: impl IntoIterator<Item = SyntaxNode>) {
        for child in children {
            self.span = self.span.union(&child.span);
            self.children.push(child);
        }
    }

    pub fn has_modifier(&self, modifier: &str) -> bool {
        self.children
            .iter()
            .any(|c| c.kind == NodeKind::Modifier && c.attrs.name.as_deref() == Some(modifier))
    }

    /// Pre-order traversal.
    pub fn walk(&self, visit: &mut impl FnMut(&SyntaxNode)) {
        visit(self);
        for child in &self.children {
            child.walk(visit);
        }
    }

    pub fn count(&self, pred: impl Fn(&SyntaxNode) -> bool) -> usize {
        let mut n = 0;
        self.walk(&mut |node| {
            if pred(node) {
                n += 1;
            }
        });
        n
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceTree {
    pub path: String,
    pub root: SyntaxNode,
    pub tokens: Vec<Token>,
    pub token_count: usize,
    pub physical_lines: usize,
    /// Tokens the parser had to skip without recognizing them.
    pub degraded: usize,
}

pub fn physical_lines(text: &str) -> usize {
    if text.is_empty() {
        return 0;
    }
    let newlines = text.bytes().filter(|&b| b == b'\n').count();
    if text.ends_with('\n') {
        newlines
    } else {
        newlines + 1
    }
}

/// Logical lines of code: physical lines carrying at least one token that is
/// neither whitespace nor a comment. Multi-line tokens mark every line they span.
pub fn count_lloc(tree: &SourceTree) -> usize {
    let mut lines: Vec<u32> = Vec::new();
    for token in tree.tokens.iter().filter(|t| !t.is_trivia()) {
        debug_assert!(token.kind != TokenKind::Whitespace);
        lines.extend(token.line..=token.end_line());
    }
    lines.sort_unstable();
    lines.dedup();
    lines.len()
}
