//! Island parser over the Kotlin token stream.
//!
//! Only the constructs the feature detectors and denominators look at are
//! recognized. Everything else is consumed without producing nodes, and a token
//! the parser cannot place is skipped and counted in `SourceTree::degraded`.
//! Expressions are not given precedence structure: interesting subexpressions
//! become sibling nodes in source order.

use super::lexer::{skip_ident, skip_template_hole, tokenize_at, Token, TokenKind};
use super::tree::{NodeKind, SourceTree, Span, SyntaxNode};

/// Soft keywords accepted as declaration modifiers.
pub const MODIFIERS: &[&str] = &[
    "abstract", "actual", "annotation", "companion", "const", "crossinline", "data", "enum",
    "expect", "external", "final", "infix", "inline", "inner", "internal", "lateinit",
    "noinline", "open", "operator", "out", "override", "private", "protected", "public",
    "reified", "sealed", "suspend", "tailrec", "value", "vararg",
];

/// Identifiers that are never callees of a trailing lambda.
const NOT_LAMBDA_CALLEES: &[&str] =
    &["init", "get", "set", "catch", "finally", "constructor", "companion", "where"];

const MAX_DEPTH: usize = 192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    TopLevel,
    Member,
    Local,
}

#[derive(Debug, Clone, Copy)]
struct Stop {
    newline: bool,
    arrow: bool,
    brace: bool,
}

impl Stop {
    const STATEMENT: Stop = Stop { newline: true, arrow: false, brace: false };
    const INNER: Stop = Stop { newline: false, arrow: false, brace: false };
    const WHEN_CONDITION: Stop = Stop { newline: false, arrow: true, brace: false };
    const SUPER_DELEGATE: Stop = Stop { newline: true, arrow: false, brace: true };
}

#[derive(Debug, Clone, Copy)]
struct Tok<'a> {
    kind: TokenKind,
    text: &'a str,
    line: u32,
    end_line: u32,
    offset: usize,
    end: usize,
    column: u32,
    nl_before: bool,
}

/// Parses a full token stream (as produced by `tokenize`) into a `SourceTree`.
pub fn parse(tokens: Vec<Token>, path: &str) -> SourceTree {
    let (root, degraded) = {
        let mut parser = Parser::new(&tokens, 0);
        let children = parser.parse_statements(Scope::TopLevel, false);
        let end_line = tokens.last().map_or(1, Token::end_line);
        let mut root = SyntaxNode::new(NodeKind::File, Span::new(1, end_line));
        root.push_children(children);
        (root, parser.degraded)
    };
    let physical_lines = tokens.last().map_or(0, |t| t.end_line() as usize);
    SourceTree {
        path: path.to_string(),
        root,
        token_count: tokens.len(),
        physical_lines,
        tokens,
        degraded,
    }
}

struct Parser<'a> {
    toks: Vec<Tok<'a>>,
    pos: usize,
    limit: usize,
    degraded: usize,
    depth: usize,
    /// Negative `is` guards of an `if (x !is T) return` statement, keyed by the
    /// index of its `if` token, applying to the statements that follow it.
    rest_guards: Option<(usize, Vec<String>)>,
}

impl<'a> Parser<'a> {
    fn new(tokens: &'a [Token], depth: usize) -> Self {
        let mut toks = Vec::new();
        let mut nl_before = false;
        for t in tokens {
            if t.kind == TokenKind::Whitespace || t.kind == TokenKind::Comment {
                if t.text.contains('\n') {
                    nl_before = true;
                }
                continue;
            }
            toks.push(Tok {
                kind: t.kind,
                text: &t.text,
                line: t.line,
                end_line: t.end_line(),
                offset: t.offset,
                end: t.end_offset(),
                column: t.column,
                nl_before,
            });
            nl_before = false;
        }
        let limit = toks.len();
        Parser { toks, pos: 0, limit, degraded: 0, depth, rest_guards: None }
    }

    // ---- cursor helpers ----------------------------------------------------

    fn peek(&self, k: usize) -> Option<&Tok<'a>> {
        let i = self.pos + k;
        if i < self.limit {
            self.toks.get(i)
        } else {
            None
        }
    }

    fn at(&self, text: &str) -> bool {
        self.peek_is(0, text)
    }

    fn peek_is(&self, k: usize, text: &str) -> bool {
        self.peek(k).is_some_and(|t| {
            t.text == text && !matches!(t.kind, TokenKind::StringLiteral | TokenKind::Other)
        })
    }

    fn at_kind(&self, kind: TokenKind) -> bool {
        self.peek(0).is_some_and(|t| t.kind == kind)
    }

    fn at_ident(&self, text: &str) -> bool {
        self.peek(0).is_some_and(|t| t.kind == TokenKind::Identifier && t.text == text)
    }

    fn eof(&self) -> bool {
        self.pos >= self.limit
    }

    fn bump(&mut self) -> Tok<'a> {
        let t = self.toks[self.pos];
        self.pos += 1;
        t
    }

    fn skip_degraded(&mut self) {
        if !self.eof() {
            self.pos += 1;
            self.degraded += 1;
        }
    }

    fn line(&self) -> u32 {
        self.peek(0)
            .map(|t| t.line)
            .or_else(|| self.toks.get(self.pos.saturating_sub(1)).map(|t| t.end_line))
            .unwrap_or(1)
    }

    fn prev_end_line(&self) -> u32 {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.toks.get(i))
            .map_or(1, |t| t.end_line)
    }

    fn span_from(&self, start_line: u32) -> Span {
        Span::new(start_line, self.prev_end_line())
    }

    fn adjacent_to_prev(&self, i: usize) -> bool {
        i > 0 && i < self.toks.len() && self.toks[i - 1].end == self.toks[i].offset
    }

    fn with_limit<R>(&mut self, limit: usize, f: impl FnOnce(&mut Self) -> R) -> R {
        let old = self.limit;
        self.limit = limit.min(old);
        let out = f(self);
        self.limit = old;
        out
    }

    /// Index of the token closing the bracket at `open`, if balanced before the limit.
    fn matching_close(&self, open: usize) -> Option<usize> {
        let mut depth = 0usize;
        for i in open..self.limit {
            let t = &self.toks[i];
            if t.kind != TokenKind::Operator {
                continue;
            }
            match t.text {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        None
    }

    fn skip_balanced(&mut self) {
        match self.matching_close(self.pos) {
            Some(close) => self.pos = close + 1,
            None => self.pos = self.limit,
        }
    }

    fn text_of(&self, from: usize, to: usize) -> String {
        self.toks[from..to].iter().map(|t| t.text).collect()
    }

    // ---- statements --------------------------------------------------------

    fn parse_statements(&mut self, scope: Scope, closing: bool) -> Vec<SyntaxNode> {
        let mut out = Vec::new();
        // (index into `out`, guards) for each `if (x !is T) return` seen so far
        let mut guarded_tails: Vec<(usize, Vec<String>)> = Vec::new();
        loop {
            let Some(t) = self.peek(0) else { break };
            if t.kind == TokenKind::Operator && t.text == "}" {
                if closing {
                    break;
                }
                self.skip_degraded();
                continue;
            }
            if self.at(";") {
                self.bump();
                continue;
            }
            let before = self.pos;
            out.extend(self.parse_statement(scope));
            if let Some((if_pos, guards)) = self.rest_guards.take() {
                if if_pos >= before {
                    guarded_tails.push((out.len(), guards));
                }
            }
            if self.pos == before {
                self.skip_degraded();
            }
        }
        // Each wrapper runs to the next guard and carries every guard seen so
        // far, which keeps the tree flat however many guards a block has.
        if let Some(&(first_start, _)) = guarded_tails.first() {
            let tail: Vec<SyntaxNode> = out.drain(first_start..).collect();
            let total = first_start + tail.len();
            let mut tail = tail.into_iter();
            let mut active: Vec<String> = Vec::new();
            for (i, (start, guards)) in guarded_tails.iter().enumerate() {
                for g in guards {
                    if !active.contains(g) {
                        active.push(g.clone());
                    }
                }
                let end = guarded_tails.get(i + 1).map_or(total, |next| next.0);
                let rest: Vec<SyntaxNode> = tail.by_ref().take(end - start).collect();
                if let Some(first) = rest.first() {
                    let mut wrapper = SyntaxNode::new(NodeKind::Other, first.span);
                    wrapper.attrs.guards = active.clone();
                    wrapper.push_children(rest);
                    out.push(wrapper);
                }
            }
        }
        out
    }

    fn parse_statement(&mut self, scope: Scope) -> Vec<SyntaxNode> {
        if self.depth > MAX_DEPTH {
            self.skip_degraded();
            return Vec::new();
        }
        self.depth += 1;
        let out = self.parse_statement_inner(scope);
        self.depth -= 1;
        out
    }

    fn parse_statement_inner(&mut self, scope: Scope) -> Vec<SyntaxNode> {
        let stmt_start = self.pos;
        self.skip_annotations();
        let start_line = self.line();
        let mods = self.parse_modifiers();
        let Some(t) = self.peek(0).copied() else { return Vec::new() };
        match (t.kind, t.text) {
            (TokenKind::Keyword, "package") | (TokenKind::Identifier, "import")
                if mods.is_empty()
                    && self.peek(1).is_some_and(|n| n.kind == TokenKind::Identifier && !n.nl_before) =>
            {
                self.bump();
                while let Some(n) = self.peek(0) {
                    if n.nl_before || n.text == ";" {
                        break;
                    }
                    self.bump();
                }
                Vec::new()
            }
            (TokenKind::Keyword, "class" | "interface") => vec![self.parse_class(mods, start_line)],
            (TokenKind::Keyword, "fun")
                if self.peek(1).is_some_and(|n| n.text == "interface") =>
            {
                let mut mods = mods;
                let fun_tok = self.bump();
                mods.push(modifier_node("fun", fun_tok.line));
                vec![self.parse_class(mods, start_line)]
            }
            (TokenKind::Keyword, "fun") => vec![self.parse_function(mods, scope, start_line)],
            (TokenKind::Keyword, "val" | "var") => self.parse_property(mods, scope, start_line),
            (TokenKind::Keyword, "typealias") => vec![self.parse_typealias(mods, start_line)],
            (TokenKind::Keyword, "object")
                if self.peek(1).is_some_and(|n| n.kind == TokenKind::Identifier)
                    || mods.iter().any(|m| m.attrs.name.as_deref() == Some("companion")) =>
            {
                vec![self.parse_object(mods, false, start_line)]
            }
            (TokenKind::Identifier, "constructor") if scope == Scope::Member && self.peek_is(1, "(") => {
                vec![self.parse_secondary_constructor(mods, start_line)]
            }
            (TokenKind::Identifier, "init") if scope != Scope::Local && self.peek_is(1, "{") => {
                self.bump();
                vec![self.parse_block(Vec::new())]
            }
            _ => {
                let mut out = mods;
                let is_if = t.kind == TokenKind::Keyword && t.text == "if";
                let if_pos = self.pos;
                out.extend(self.parse_expr(Stop::STATEMENT));
                if !is_if {
                    self.rest_guards = None;
                } else if let Some((pos, _)) = &self.rest_guards {
                    if *pos != if_pos {
                        self.rest_guards = None;
                    }
                }
                if self.pos == stmt_start {
                    return out;
                }
                out
            }
        }
    }

    /// Length of a run of modifier words (with interleaved annotations) that
    /// ends in a declaration keyword; zero when the words are ordinary identifiers.
    fn modifier_run_len(&self) -> usize {
        let mut i = self.pos;
        let mut saw = false;
        while i < self.limit {
            let t = &self.toks[i];
            if t.kind == TokenKind::Identifier && MODIFIERS.contains(&t.text) {
                saw = true;
                i += 1;
                continue;
            }
            if t.kind == TokenKind::Operator && t.text == "@" && saw {
                // annotation between modifiers
                i += 1;
                while i < self.limit && matches!(self.toks[i].kind, TokenKind::Identifier)
                    || (i < self.limit && self.toks[i].text == ".")
                {
                    i += 1;
                }
                if i < self.limit && self.toks[i].text == "(" {
                    let saved = i;
                    let mut depth = 0;
                    while i < self.limit {
                        match self.toks[i].text {
                            "(" => depth += 1,
                            ")" => {
                                depth -= 1;
                                if depth == 0 {
                                    i += 1;
                                    break;
                                }
                            }
                            _ => {}
                        }
                        i += 1;
                    }
                    if depth != 0 {
                        i = saved;
                    }
                }
                continue;
            }
            break;
        }
        if !saw || i >= self.limit {
            return 0;
        }
        let t = &self.toks[i];
        let decl = match t.kind {
            TokenKind::Keyword => matches!(
                t.text,
                "class" | "interface" | "fun" | "val" | "var" | "object" | "typealias"
            ),
            TokenKind::Identifier => matches!(t.text, "constructor" | "get" | "set" | "init"),
            _ => false,
        };
        if decl {
            i - self.pos
        } else {
            0
        }
    }

    fn parse_modifiers(&mut self) -> Vec<SyntaxNode> {
        let run = self.modifier_run_len();
        let end = self.pos + run;
        let mut mods = Vec::new();
        while self.pos < end {
            if self.at("@") {
                self.skip_annotations();
                continue;
            }
            let t = self.bump();
            mods.push(modifier_node(t.text, t.line));
        }
        mods
    }

    fn skip_annotations(&mut self) {
        while self.at("@") && !self.adjacent_to_prev(self.pos) {
            self.skip_annotation();
        }
    }

    fn skip_annotation(&mut self) {
        self.bump(); // @
        if self.at("[") {
            self.skip_balanced();
            return;
        }
        if self.at_kind(TokenKind::Identifier) || self.at_kind(TokenKind::Keyword) {
            self.bump();
            // use-site target: @file:JvmName, @get:Rule
            if self.at(":") && self.peek(1).is_some_and(|t| t.kind == TokenKind::Identifier) {
                self.bump();
                self.bump();
            }
            while self.at(".") && self.peek(1).is_some_and(|t| t.kind == TokenKind::Identifier) {
                self.bump();
                self.bump();
            }
            if self.at("<") {
                self.skip_angle();
            }
            if self.at("(") && !self.peek(0).unwrap().nl_before {
                self.skip_balanced();
            }
        }
    }

    // ---- declarations -------------------------------------------------------

    fn parse_class(&mut self, mods: Vec<SyntaxNode>, start_line: u32) -> SyntaxNode {
        let kw = self.bump();
        let mut node = SyntaxNode::new(NodeKind::ClassDecl, Span::new(start_line, kw.line));
        node.attrs.interface = kw.text == "interface";
        let is_enum = mods.iter().any(|m| m.attrs.name.as_deref() == Some("enum"));
        node.push_children(mods);
        if self.at_kind(TokenKind::Identifier) {
            node.attrs.name = Some(self.bump().text.to_string());
        }
        if self.at("<") {
            self.skip_angle();
        }
        // primary constructor
        let save = self.pos;
        let ctor_line = self.line();
        self.skip_annotations();
        let ctor_mods = self.parse_modifiers();
        if self.at_ident("constructor") && self.peek_is(1, "(") {
            self.bump();
        } else if !(ctor_mods.is_empty() && self.pos == save) {
            self.pos = save;
        }
        if self.at("(") && (self.pos != save || !self.peek(0).unwrap().nl_before) {
            let mut ctor = SyntaxNode::new(NodeKind::ConstructorDecl, Span::new(ctor_line, ctor_line));
            ctor.push_children(ctor_mods);
            let (params, defaults) = self.parse_params();
            ctor.attrs.default_params = defaults;
            ctor.push_children(params);
            ctor.span = ctor.span.union(&self.span_from(ctor_line));
            node.push_children([ctor]);
        } else {
            self.pos = save;
        }
        if self.at(":") {
            self.bump();
            let supers = self.parse_supertypes();
            node.push_children(supers);
        }
        self.skip_where_clause();
        if self.at("{") {
            let body = self.parse_class_body(is_enum);
            node.push_children(body);
        }
        node.span = node.span.union(&self.span_from(start_line));
        node
    }

    fn skip_where_clause(&mut self) {
        if self.at_ident("where") {
            self.bump();
            while let Some(t) = self.peek(0) {
                if matches!(t.text, "{" | "=" | ";" | "}") || t.nl_before && t.text != "," {
                    break;
                }
                self.bump();
            }
        }
    }

    fn parse_class_body(&mut self, is_enum: bool) -> Vec<SyntaxNode> {
        self.bump(); // {
        let mut out = Vec::new();
        if is_enum {
            out.extend(self.parse_enum_entries());
        }
        out.extend(self.parse_statements(Scope::Member, true));
        if self.at("}") {
            self.bump();
        }
        out
    }

    fn parse_enum_entries(&mut self) -> Vec<SyntaxNode> {
        let mut out = Vec::new();
        loop {
            self.skip_annotations();
            if !self.at_kind(TokenKind::Identifier) || self.modifier_run_len() > 0 {
                break;
            }
            let entry = self.bump();
            if self.at("(") {
                out.extend(self.parse_delimited());
            }
            if self.at("{") {
                let start = self.line();
                let members = self.parse_class_body(false);
                let mut anon = SyntaxNode::new(NodeKind::Other, Span::new(entry.line, start))
                    .with_name(entry.text);
                anon.push_children(members);
                out.push(anon);
            }
            if self.at(",") {
                self.bump();
                continue;
            }
            if self.at(";") {
                self.bump();
            }
            break;
        }
        out
    }

    fn parse_supertypes(&mut self) -> Vec<SyntaxNode> {
        let mut out = Vec::new();
        loop {
            self.skip_annotations();
            let line = self.line();
            let type_start = self.pos;
            self.skip_type();
            if self.pos == type_start {
                break;
            }
            let mut entry = SyntaxNode::new(NodeKind::SuperTypeEntry, Span::new(line, line))
                .with_name(self.text_of(type_start, self.pos));
            if self.at("(") && !self.peek(0).unwrap().nl_before {
                let args = self.parse_delimited();
                entry.push_children(args);
            }
            if self.at_ident("by") {
                self.bump();
                entry.attrs.delegated = true;
                let delegate = self.parse_expr(Stop::SUPER_DELEGATE);
                entry.push_children(delegate);
            }
            entry.span = entry.span.union(&self.span_from(line));
            out.push(entry);
            if self.at(",") {
                self.bump();
                continue;
            }
            break;
        }
        out
    }

    fn parse_object(&mut self, mods: Vec<SyntaxNode>, in_expr: bool, start_line: u32) -> SyntaxNode {
        let kw = self.bump();
        let companion = mods.iter().any(|m| m.attrs.name.as_deref() == Some("companion"));
        let kind = if companion { NodeKind::CompanionObjectDecl } else { NodeKind::ObjectDecl };
        let mut node = SyntaxNode::new(kind, Span::new(start_line, kw.line));
        node.push_children(mods);
        if !in_expr && self.at_kind(TokenKind::Identifier) && !self.at_ident("by") {
            node.attrs.name = Some(self.bump().text.to_string());
        }
        node.attrs.literal = !companion && node.attrs.name.is_none();
        if self.at(":") {
            self.bump();
            let supers = self.parse_supertypes();
            node.push_children(supers);
        }
        if self.at("{") && (!in_expr || !self.peek(0).unwrap().nl_before || node.attrs.literal) {
            let body = self.parse_class_body(false);
            node.push_children(body);
        }
        node.span = node.span.union(&self.span_from(start_line));
        node
    }

    fn parse_function(&mut self, mods: Vec<SyntaxNode>, scope: Scope, start_line: u32) -> SyntaxNode {
        let kw = self.bump(); // fun
        let mut node = SyntaxNode::new(NodeKind::FunctionDecl, Span::new(start_line, kw.line));
        node.attrs.local = scope == Scope::Local;
        node.push_children(mods);
        if self.at("<") {
            self.skip_angle();
        }
        let mut receiver: Option<String> = None;
        if self.at("(") {
            // Either the parameters of an anonymous function or a parenthesized receiver type.
            if let Some(close) = self.matching_close(self.pos) {
                let after = self.toks.get(close + 1).filter(|_| close + 1 < self.limit);
                if let Some(sep) = after.filter(|t| t.text == "." || t.text == "?.") {
                    let mut recv = self.text_of(self.pos, close + 1);
                    if sep.text == "?." {
                        recv.push('?');
                    }
                    receiver = Some(recv);
                    self.pos = close + 2;
                }
            }
        }
        if !self.at("(") {
            let header_start = self.pos;
            let mut i = self.pos;
            let mut angle = 0i32;
            let mut found = false;
            while i < self.limit {
                let t = &self.toks[i];
                if i > header_start && t.nl_before {
                    break;
                }
                match t.text {
                    "<" => angle += 1,
                    ">" => angle -= 1,
                    "(" if angle <= 0 => {
                        found = true;
                        break;
                    }
                    "{" | "}" | "=" | ";" | ")" => break,
                    _ => {}
                }
                i += 1;
            }
            if found && i > header_start && self.toks[i - 1].kind == TokenKind::Identifier {
                node.attrs.name = Some(self.toks[i - 1].text.trim_matches('`').to_string());
                if i >= header_start + 3 {
                    let sep = self.toks[i - 2].text;
                    let mut recv = self.text_of(header_start, i - 2);
                    if sep == "?." {
                        recv.push('?');
                    }
                    receiver = Some(match receiver {
                        Some(outer) => format!("{outer}.{recv}"),
                        None => recv,
                    });
                }
                self.pos = i;
            }
        }
        node.attrs.receiver_type = receiver;
        if self.at("(") {
            let (params, defaults) = self.parse_params();
            node.attrs.default_params = defaults;
            node.push_children(params);
        }
        if self.at(":") {
            self.bump();
            self.skip_type();
        }
        self.skip_where_clause();
        if self.at("{") {
            let body = self.parse_block(Vec::new());
            node.push_children([body]);
        } else if self.at("=") {
            self.bump();
            let body = self.parse_expr(Stop::STATEMENT);
            node.push_children(body);
        }
        node.span = node.span.union(&self.span_from(start_line));
        node
    }

    /// Parameter list of a function or constructor. Returns nodes found in
    /// parameters (constructor properties, default-value expressions) and the
    /// number of parameters that declare a default.
    fn parse_params(&mut self) -> (Vec<SyntaxNode>, u32) {
        self.bump(); // (
        let mut out = Vec::new();
        let mut defaults = 0;
        loop {
            if self.at(")") {
                self.bump();
                break;
            }
            if self.eof() || self.at("}") || self.at("]") {
                break;
            }
            let before = self.pos;
            self.skip_annotations();
            let line = self.line();
            while self.at_kind(TokenKind::Identifier)
                && MODIFIERS.contains(&self.peek(0).unwrap().text)
                && self.peek(1).is_some_and(|t| {
                    t.kind == TokenKind::Identifier || matches!(t.text, "val" | "var" | "@")
                })
            {
                self.bump();
            }
            let property = self.at("val") || self.at("var");
            if property {
                self.bump();
            }
            let name = if self.at_kind(TokenKind::Identifier) {
                Some(self.bump().text.to_string())
            } else {
                None
            };
            let typed = self.at(":");
            if typed {
                self.bump();
                self.skip_type();
            }
            let mut default_nodes = Vec::new();
            let has_default = self.at("=");
            if has_default {
                self.bump();
                defaults += 1;
                default_nodes = self.parse_expr(Stop::INNER);
            }
            if property {
                let mut prop = SyntaxNode::new(NodeKind::PropertyDecl, self.span_from(line));
                prop.attrs.name = name;
                prop.attrs.has_type_annotation = typed;
                prop.attrs.has_initializer = has_default;
                prop.push_children(default_nodes);
                out.push(prop);
            } else {
                out.extend(default_nodes);
            }
            if self.at(",") {
                self.bump();
            } else if !self.at(")") && self.pos == before {
                self.skip_degraded();
            } else if !self.at(")") {
                // unexpected token inside the parameter list
                self.skip_degraded();
            }
        }
        (out, defaults)
    }

    fn parse_property(&mut self, mods: Vec<SyntaxNode>, scope: Scope, start_line: u32) -> Vec<SyntaxNode> {
        self.bump(); // val | var
        if self.at("<") {
            self.skip_angle();
        }
        if self.at("(") {
            let mut node = self.parse_destructuring(start_line);
            node.push_children(mods);
            if self.at("=") {
                self.bump();
                let init = self.parse_expr(Stop::STATEMENT);
                node.push_children(init);
            }
            return vec![node];
        }
        let mut node = SyntaxNode::new(NodeKind::VariableDecl, Span::new(start_line, start_line));
        node.attrs.local = scope == Scope::Local;
        node.push_children(mods);
        let header_start = self.pos;
        let mut i = self.pos;
        let mut angle = 0i32;
        while i < self.limit {
            let t = &self.toks[i];
            if i > header_start && t.nl_before && angle <= 0 {
                break;
            }
            match t.text {
                "<" => angle += 1,
                ">" => angle -= 1,
                ":" | "=" | ";" | "}" | ")" | "," | "{" if angle <= 0 => break,
                "by" if t.kind == TokenKind::Identifier && angle <= 0 => break,
                _ => {}
            }
            if t.kind == TokenKind::Keyword && !matches!(t.text, "in" | "out") {
                break;
            }
            i += 1;
        }
        if i > header_start && self.toks[i - 1].kind == TokenKind::Identifier {
            node.attrs.name = Some(self.toks[i - 1].text.trim_matches('`').to_string());
            if i >= header_start + 3 {
                let mut recv = self.text_of(header_start, i - 2);
                if self.toks[i - 2].text == "?." {
                    recv.push('?');
                }
                node.attrs.receiver_type = Some(recv);
            }
            self.pos = i;
        }
        if self.at(":") {
            self.bump();
            node.attrs.has_type_annotation = true;
            self.skip_type();
        }
        if self.at("=") {
            self.bump();
            node.attrs.has_initializer = true;
            let init = self.parse_expr(Stop::STATEMENT);
            node.push_children(init);
        } else if self.at_ident("by") {
            self.bump();
            node.attrs.delegated = true;
            let delegate = self.parse_expr(Stop::STATEMENT);
            node.push_children(delegate);
        }
        if scope != Scope::Local {
            let accessors = self.parse_accessors();
            node.push_children(accessors);
        }
        node.span = node.span.union(&self.span_from(start_line));
        vec![node]
    }

    fn parse_accessors(&mut self) -> Vec<SyntaxNode> {
        let mut out = Vec::new();
        for _ in 0..2 {
            let save = self.pos;
            self.skip_annotations();
            let line = self.line();
            while self.at_kind(TokenKind::Identifier)
                && MODIFIERS.contains(&self.peek(0).unwrap().text)
            {
                self.bump();
            }
            if !(self.at_ident("get") || self.at_ident("set")) {
                self.pos = save;
                break;
            }
            let which = self.bump();
            let mut accessor = SyntaxNode::new(NodeKind::Other, Span::new(line, which.line))
                .with_operator(which.text);
            if self.at("(") {
                let params = self.parse_delimited();
                accessor.push_children(params);
                if self.at(":") {
                    self.bump();
                    self.skip_type();
                }
                if self.at("=") {
                    self.bump();
                    let body = self.parse_expr(Stop::STATEMENT);
                    accessor.push_children(body);
                } else if self.at("{") {
                    let body = self.parse_block(Vec::new());
                    accessor.push_children([body]);
                }
            } else if !(self.eof() || self.at("}") || self.at(";") || self.peek(0).unwrap().nl_before) {
                self.pos = save;
                break;
            }
            accessor.span = accessor.span.union(&self.span_from(line));
            out.push(accessor);
        }
        out
    }

    fn parse_destructuring(&mut self, start_line: u32) -> SyntaxNode {
        self.bump(); // (
        let mut components = 0;
        loop {
            self.skip_annotations();
            if self.at_kind(TokenKind::Identifier) {
                self.bump();
                components += 1;
                if self.at(":") {
                    self.bump();
                    self.skip_type();
                }
            }
            if self.at(",") {
                self.bump();
                continue;
            }
            if self.at(")") {
                self.bump();
            } else {
                self.degraded += 1;
            }
            break;
        }
        let mut node = SyntaxNode::new(NodeKind::DestructuringDecl, self.span_from(start_line));
        node.attrs.components = components;
        node
    }

    fn parse_typealias(&mut self, mods: Vec<SyntaxNode>, start_line: u32) -> SyntaxNode {
        self.bump();
        let mut node = SyntaxNode::new(NodeKind::TypeAliasDecl, Span::new(start_line, start_line));
        node.push_children(mods);
        if self.at_kind(TokenKind::Identifier) {
            node.attrs.name = Some(self.bump().text.to_string());
        }
        if self.at("<") {
            self.skip_angle();
        }
        if self.at("=") {
            self.bump();
            self.skip_type();
        }
        node.span = node.span.union(&self.span_from(start_line));
        node
    }

    fn parse_secondary_constructor(&mut self, mods: Vec<SyntaxNode>, start_line: u32) -> SyntaxNode {
        self.bump(); // constructor
        let mut node = SyntaxNode::new(NodeKind::ConstructorDecl, Span::new(start_line, start_line));
        node.push_children(mods);
        let (params, defaults) = self.parse_params();
        node.attrs.default_params = defaults;
        node.push_children(params);
        if self.at(":") {
            self.bump();
            if self.at("this") || self.at("super") {
                self.bump();
            }
            if self.at("(") {
                let args = self.parse_delimited();
                node.push_children(args);
            }
        }
        if self.at("{") {
            let body = self.parse_block(Vec::new());
            node.push_children([body]);
        }
        node.span = node.span.union(&self.span_from(start_line));
        node
    }

    // ---- types -------------------------------------------------------------

    fn skip_type(&mut self) {
        loop {
            self.skip_annotations();
            while self.at_ident("suspend") && self.peek_is(1, "(") {
                self.bump();
            }
            let grouped = if self.at_kind(TokenKind::Identifier) || self.at("*") || self.at("dynamic") {
                self.bump();
                if self.at("<") {
                    self.skip_angle();
                }
                false
            } else if self.at("(") {
                self.skip_balanced();
                true
            } else {
                break;
            };
            while self.at("?") {
                self.bump();
            }
            if self.at(".")
                && self.peek(1).is_some_and(|t| t.kind == TokenKind::Identifier || t.text == "(")
            {
                self.bump();
                continue;
            }
            if grouped && self.at("->") {
                self.bump();
                continue;
            }
            break;
        }
    }

    fn skip_angle(&mut self) {
        let mut depth = 0i32;
        while let Some(t) = self.peek(0) {
            match t.text {
                "<" => depth += 1,
                ">" => {
                    depth -= 1;
                    if depth <= 0 {
                        self.bump();
                        return;
                    }
                }
                "{" | "}" | ";" | "=" | "==" | "&&" | "||" => return,
                _ => {}
            }
            self.bump();
        }
    }

    /// At an identifier followed by `<`: do the angle brackets close into a call?
    fn generic_call_ahead(&self, lt: usize) -> bool {
        let mut depth = 0i32;
        let mut parens = 0i32;
        let end = (lt + 64).min(self.limit);
        for i in lt..end {
            let t = &self.toks[i];
            match (t.kind, t.text) {
                (TokenKind::Operator, "<") => depth += 1,
                (TokenKind::Operator, ">") => {
                    depth -= 1;
                    if depth == 0 {
                        return self.toks.get(i + 1).is_some_and(|n| {
                            i + 1 < self.limit && !n.nl_before && matches!(n.text, "(" | "{" | "::")
                        });
                    }
                }
                (TokenKind::Operator, "(") => parens += 1,
                (TokenKind::Operator, ")") => {
                    parens -= 1;
                    if parens < 0 {
                        return false;
                    }
                }
                (TokenKind::Operator, "," | "." | "?" | "*" | "->" | ":" | "@") => {}
                (TokenKind::Identifier, _) => {}
                (TokenKind::Keyword, "in" | "out") => {}
                _ => return false,
            }
        }
        false
    }

    // ---- expressions -------------------------------------------------------

    fn parse_expr(&mut self, stop: Stop) -> Vec<SyntaxNode> {
        let mut out = Vec::new();
        let start = self.pos;
        while let Some(t) = self.peek(0).copied() {
            if self.pos > start && t.nl_before && stop.newline && !self.continues() {
                break;
            }
            match (t.kind, t.text) {
                (TokenKind::Operator, "}" | ")" | "]" | ";" | ",") => break,
                (TokenKind::Operator, "->") if stop.arrow => break,
                (TokenKind::Operator, "{") if stop.brace => break,
                (TokenKind::Keyword, "val" | "var" | "class" | "interface" | "typealias" | "package" | "else") => {
                    break
                }
                _ => {}
            }
            self.parse_atom(&mut out, stop);
        }
        out
    }

    /// Parses everything up to the current limit, tolerating separators.
    fn parse_expr_all(&mut self) -> Vec<SyntaxNode> {
        let mut out = Vec::new();
        while !self.eof() {
            let before = self.pos;
            out.extend(self.parse_expr(Stop::INNER));
            if self.pos == before {
                if self.at(",") || self.at(";") {
                    self.bump();
                } else {
                    self.skip_degraded();
                }
            }
        }
        out
    }

    /// Whether a statement continues onto the line starting at the current token.
    fn continues(&self) -> bool {
        let cur = &self.toks[self.pos];
        if matches!(cur.text, "." | "?." | "?:" | "&&" | "||" | ".." | "..<")
            && cur.kind == TokenKind::Operator
            || (cur.kind == TokenKind::Keyword && matches!(cur.text, "as"))
        {
            return true;
        }
        let Some(prev) = self.pos.checked_sub(1).map(|i| &self.toks[i]) else { return false };
        match prev.kind {
            TokenKind::Operator => matches!(
                prev.text,
                "=" | "+" | "-" | "*" | "/" | "%" | "&&" | "||" | "?:" | "." | "?." | "(" | "["
                    | "," | "==" | "!=" | "===" | "!==" | "<=" | ">=" | ".." | "..<" | "->"
                    | "+=" | "-=" | "*=" | "/=" | "%=" | "!" | "::"
            ),
            TokenKind::Keyword => matches!(prev.text, "in" | "is" | "as"),
            _ => false,
        }
    }

    fn parse_atom(&mut self, out: &mut Vec<SyntaxNode>, stop: Stop) {
        if self.depth > MAX_DEPTH {
            self.skip_degraded();
            return;
        }
        self.depth += 1;
        let t = self.peek(0).copied().expect("parse_atom at eof");
        match t.kind {
            TokenKind::StringLiteral => {
                self.bump();
                out.push(self.string_node(&t));
            }
            TokenKind::Identifier => self.parse_identifier(out, stop),
            TokenKind::Keyword => self.parse_keyword(out),
            TokenKind::Operator => self.parse_operator(out),
            _ => {
                self.bump();
            }
        }
        self.depth -= 1;
    }

    fn parse_identifier(&mut self, out: &mut Vec<SyntaxNode>, stop: Stop) {
        let t = self.peek(0).copied().unwrap();
        let next = self.peek(1).copied();
        let same_line = |n: &Option<Tok>| n.is_some_and(|n| !n.nl_before);
        let next_is = |text: &str| next.is_some_and(|n| n.text == text && n.kind == TokenKind::Operator);

        if t.text == "suspend" && next_is("{") && same_line(&next) {
            let line = self.bump().line;
            out.push(self.parse_lambda(Some(("suspend", line))));
            return;
        }
        if next_is("(") && same_line(&next) {
            out.push(self.parse_call());
            return;
        }
        if next_is("<") && self.generic_call_ahead(self.pos + 1) {
            out.push(self.parse_call());
            return;
        }
        if next_is("{") && same_line(&next) && !stop.brace && !NOT_LAMBDA_CALLEES.contains(&t.text) {
            out.push(self.parse_call());
            return;
        }
        if self.in_infix_position() {
            out.push(SyntaxNode::new(NodeKind::BinaryOp, Span::new(t.line, t.line)).with_operator(t.text));
        }
        self.bump();
    }

    /// Identifier between two operands on one line, e.g. `0 until n`.
    fn in_infix_position(&self) -> bool {
        let i = self.pos;
        if i == 0 || i + 1 >= self.limit {
            return false;
        }
        let (prev, cur, next) = (&self.toks[i - 1], &self.toks[i], &self.toks[i + 1]);
        if cur.nl_before || next.nl_before {
            return false;
        }
        let ends_operand = match prev.kind {
            TokenKind::Identifier | TokenKind::Number | TokenKind::StringLiteral | TokenKind::Other => true,
            TokenKind::Keyword => matches!(prev.text, "this" | "true" | "false" | "null" | "super"),
            TokenKind::Operator => matches!(prev.text, ")" | "]" | "!!"),
            _ => false,
        };
        let starts_operand = match next.kind {
            TokenKind::Identifier | TokenKind::Number | TokenKind::StringLiteral | TokenKind::Other => true,
            TokenKind::Keyword => matches!(prev.text, "this" | "true" | "false" | "null" | "super" | "if" | "when"),
            TokenKind::Operator => matches!(next.text, "(" | "-" | "!"),
            _ => false,
        };
        ends_operand && starts_operand
    }

    fn parse_call(&mut self) -> SyntaxNode {
        let callee = self.bump();
        let mut node =
            SyntaxNode::new(NodeKind::CallExpr, Span::new(callee.line, callee.line)).with_name(callee.text.trim_matches('`'));
        if self.at("<") {
            self.skip_angle();
        }
        if self.at("(") && !self.peek(0).unwrap().nl_before {
            self.bump();
            loop {
                if self.at(")") {
                    self.bump();
                    break;
                }
                if self.eof() || self.at("}") || self.at("]") {
                    break;
                }
                let before = self.pos;
                let line = self.line();
                let named = self.at_kind(TokenKind::Identifier) && self.peek_is(1, "=");
                if named {
                    self.bump();
                    self.bump();
                }
                if self.at("*") {
                    self.bump();
                }
                let value = self.parse_expr(Stop::INNER);
                let mut arg = SyntaxNode::new(NodeKind::CallArgument, self.span_from(line));
                arg.attrs.named = named;
                arg.push_children(value);
                node.push_children([arg]);
                if self.at(",") {
                    self.bump();
                } else if self.pos == before || !self.at(")") {
                    self.skip_degraded();
                }
            }
        }
        // trailing lambda, optionally labelled: `forEach loop@{ ... }`
        let label_len = if self.at_kind(TokenKind::Identifier)
            && self.peek_is(1, "@")
            && self.peek_is(2, "{")
            && self.adjacent_to_prev(self.pos + 1)
        {
            2
        } else {
            0
        };
        if self.peek_is(label_len, "{") && !self.peek(label_len).unwrap().nl_before {
            let line = self.line();
            for _ in 0..label_len {
                self.bump();
            }
            let lambda = self.parse_lambda(None);
            let mut arg = SyntaxNode::new(NodeKind::CallArgument, Span::new(line, line));
            arg.attrs.trailing = true;
            arg.push_children([lambda]);
            node.push_children([arg]);
        }
        node
    }

    fn parse_lambda(&mut self, modifier: Option<(&str, u32)>) -> SyntaxNode {
        let start_line = modifier.map_or_else(|| self.line(), |m| m.1);
        self.bump(); // {
        let mut node = SyntaxNode::new(NodeKind::LambdaExpr, Span::new(start_line, start_line));
        if let Some((name, line)) = modifier {
            node.push_children([modifier_node(name, line)]);
        }
        let params = self.try_lambda_params();
        node.push_children(params);
        let body = self.parse_statements(Scope::Local, true);
        node.push_children(body);
        if self.at("}") {
            self.bump();
        }
        node.span = node.span.union(&self.span_from(start_line));
        node
    }

    /// `{ a, (b, c): T -> ...}`: consumes the parameter list and the arrow when present.
    fn try_lambda_params(&mut self) -> Vec<SyntaxNode> {
        let save = self.pos;
        let mut nodes = Vec::new();
        loop {
            if self.at("->") {
                self.bump();
                return nodes;
            }
            if self.at_kind(TokenKind::Identifier) {
                self.bump();
            } else if self.at("(") {
                let line = self.line();
                let node = self.parse_destructuring(line);
                nodes.push(node);
            } else {
                break;
            }
            if self.at(":") {
                self.bump();
                self.skip_type();
            }
            if self.at(",") {
                self.bump();
                continue;
            }
            if self.at("->") {
                continue;
            }
            break;
        }
        self.pos = save;
        Vec::new()
    }

    fn parse_keyword(&mut self, out: &mut Vec<SyntaxNode>) {
        let t = self.peek(0).copied().unwrap();
        match t.text {
            "if" => out.push(self.parse_if()),
            "when" => out.push(self.parse_when()),
            "try" => out.push(self.parse_try()),
            "for" => out.push(self.parse_for()),
            "while" => out.push(self.parse_while()),
            "do" => out.push(self.parse_do()),
            "object" => {
                let line = t.line;
                out.push(self.parse_object(Vec::new(), true, line));
            }
            "fun" => {
                let line = t.line;
                out.push(self.parse_function(Vec::new(), Scope::Local, line));
            }
            "is" => {
                self.bump();
                self.skip_type();
            }
            "as" => {
                self.bump();
                if self.at("?") && self.adjacent_to_prev(self.pos) {
                    self.bump();
                }
                self.skip_type();
            }
            "return" | "break" | "continue" | "this" | "super" => {
                self.bump();
                if self.at("@") && self.adjacent_to_prev(self.pos) {
                    self.bump();
                    if self.at_kind(TokenKind::Identifier) && self.adjacent_to_prev(self.pos) {
                        self.bump();
                    }
                }
                if t.text == "super" && self.at("<") {
                    self.skip_angle();
                }
            }
            _ => {
                self.bump();
            }
        }
    }

    fn parse_operator(&mut self, out: &mut Vec<SyntaxNode>) {
        let t = self.peek(0).copied().unwrap();
        match t.text {
            "(" | "[" => out.extend(self.parse_delimited()),
            "{" => out.push(self.parse_lambda(None)),
            "?." | "." => {
                let receiver = self.simple_receiver();
                if t.text == "?." || receiver.is_some() {
                    let mut node =
                        SyntaxNode::new(NodeKind::BinaryOp, Span::new(t.line, t.line)).with_operator(t.text);
                    node.attrs.name = receiver;
                    out.push(node);
                }
                self.bump();
            }
            ".." | "..<" => {
                out.push(SyntaxNode::new(NodeKind::BinaryOp, Span::new(t.line, t.line)).with_operator(t.text));
                self.bump();
            }
            "!!" => {
                out.push(
                    SyntaxNode::new(NodeKind::UnaryPostfixOp, Span::new(t.line, t.line)).with_operator("!!"),
                );
                self.bump();
            }
            "!" => {
                self.bump();
                if (self.at("is") || self.at("in")) && self.adjacent_to_prev(self.pos) {
                    let kw = self.bump();
                    if kw.text == "is" {
                        self.skip_type();
                    }
                }
            }
            "@" => {
                if self.adjacent_to_prev(self.pos) {
                    self.bump();
                } else {
                    self.skip_annotation();
                }
            }
            "::" => {
                self.bump();
                if self.at("class") {
                    self.bump();
                }
            }
            _ => {
                self.bump();
            }
        }
    }

    /// Name of the plain identifier receiver of the `.`/`?.` at the cursor.
    fn simple_receiver(&self) -> Option<String> {
        let i = self.pos;
        let prev = self.toks.get(i.checked_sub(1)?)?;
        if prev.kind != TokenKind::Identifier {
            return None;
        }
        if let Some(before) = i.checked_sub(2).and_then(|j| self.toks.get(j)) {
            if matches!(before.text, "." | "?." | "::" | "@") && before.kind == TokenKind::Operator {
                return None;
            }
        }
        Some(prev.text.to_string())
    }

    /// `( ... )` or `[ ... ]` with comma-separated content.
    fn parse_delimited(&mut self) -> Vec<SyntaxNode> {
        let open = self.bump();
        let close_text = if open.text == "(" { ")" } else { "]" };
        let mut out = Vec::new();
        loop {
            if self.at(close_text) {
                self.bump();
                break;
            }
            if self.eof() || self.at("}") || self.at(")") || self.at("]") {
                break;
            }
            let before = self.pos;
            out.extend(self.parse_expr(Stop::INNER));
            if self.at(",") || self.at(";") {
                self.bump();
            } else if self.pos == before {
                self.skip_degraded();
            }
        }
        out
    }

    fn parse_block(&mut self, guards: Vec<String>) -> SyntaxNode {
        let start = self.line();
        self.bump(); // {
        let mut node = SyntaxNode::new(NodeKind::Block, Span::new(start, start));
        node.attrs.guards = guards;
        let body = self.parse_statements(Scope::Local, true);
        node.push_children(body);
        if self.at("}") {
            self.bump();
        }
        node.span = node.span.union(&self.span_from(start));
        node
    }

    /// Body of `if`/`else`/`for`/`while`/when-branch: a block or a single statement.
    fn parse_branch(&mut self, guards: Vec<String>) -> SyntaxNode {
        if self.at("{") {
            return self.parse_block(guards);
        }
        let start = self.line();
        let mut node = SyntaxNode::new(NodeKind::Other, Span::new(start, start));
        node.attrs.guards = guards;
        let body = if self.at("val") || self.at("var") {
            self.parse_property(Vec::new(), Scope::Local, start)
        } else {
            self.parse_expr(Stop::STATEMENT)
        };
        node.push_children(body);
        node
    }

    /// Parses a condition spanning `[start, end)`, splitting on top-level
    /// `&&`/`||`. Returns the nodes, the identifiers smart-cast in the
    /// positive branch and those smart-cast when the condition is false.
    fn parse_condition(&mut self, start: usize, end: usize) -> (Vec<SyntaxNode>, Vec<String>, Vec<String>) {
        let mut disjuncts: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        let mut depth = 0i32;
        let mut seg = start;
        for i in start..end {
            let t = &self.toks[i];
            if t.kind != TokenKind::Operator {
                continue;
            }
            match t.text {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                "&&" | "||" if depth == 0 => {
                    disjuncts.last_mut().unwrap().push((seg, i));
                    if t.text == "||" {
                        disjuncts.push(Vec::new());
                    }
                    seg = i + 1;
                }
                _ => {}
            }
        }
        disjuncts.last_mut().unwrap().push((seg, end));

        let mut nodes = Vec::new();
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        let mut all_negative = true;
        for conjuncts in &disjuncts {
            let mut guarded: Vec<String> = Vec::new();
            for &(a, b) in conjuncts {
                let guard = self.guard_at(a, b);
                self.pos = a;
                let kids = self.with_limit(b, |p| p.parse_expr_all());
                if guarded.is_empty() || kids.is_empty() {
                    nodes.extend(kids);
                } else {
                    let mut wrapper = SyntaxNode::new(NodeKind::Other, kids[0].span);
                    wrapper.attrs.guards = guarded.clone();
                    wrapper.push_children(kids);
                    nodes.push(wrapper);
                }
                match guard.clone() {
                    Some((name, true)) => guarded.push(name),
                    Some((name, false)) if conjuncts.len() == 1 => negative.push(name),
                    _ => all_negative = false,
                }
                if matches!(guard, Some((_, true))) || conjuncts.len() > 1 {
                    all_negative = false;
                }
            }
            if disjuncts.len() == 1 {
                positive = guarded;
            }
        }
        self.pos = end;
        if !all_negative {
            negative.clear();
        }
        (nodes, positive, negative)
    }

    /// `x is T` (positive) or `x !is T` (negative) spanning `[a, b)`.
    fn guard_at(&self, a: usize, b: usize) -> Option<(String, bool)> {
        let first = self.toks.get(a)?;
        if first.kind != TokenKind::Identifier || a + 1 >= b {
            return None;
        }
        let second = &self.toks[a + 1];
        if second.kind == TokenKind::Keyword && second.text == "is" {
            return Some((first.text.to_string(), true));
        }
        if second.text == "!" && a + 2 < b {
            let third = &self.toks[a + 2];
            if third.kind == TokenKind::Keyword && third.text == "is" && third.offset == second.end {
                return Some((first.text.to_string(), false));
            }
        }
        None
    }

    fn parse_if(&mut self) -> SyntaxNode {
        let if_pos = self.pos;
        let kw = self.bump();
        let mut node = SyntaxNode::new(NodeKind::Other, Span::new(kw.line, kw.line)).with_operator("if");
        let mut then_guards = Vec::new();
        let mut neg_guards = Vec::new();
        if self.at("(") {
            let close = self.matching_close(self.pos).unwrap_or(self.limit);
            let open = self.pos;
            let (nodes, pos, neg) = self.parse_condition(open + 1, close);
            node.push_children(nodes);
            then_guards = pos;
            neg_guards = neg;
            if self.at(")") {
                self.bump();
            }
        }
        let then_first = self.peek(0).map(|t| t.text);
        let then_inner = if then_first == Some("{") { self.peek(1).map(|t| t.text) } else { then_first };
        let jumps = matches!(then_inner, Some("return" | "throw" | "break" | "continue"));
        if !self.eof() && !self.at("else") {
            let then = self.parse_branch(then_guards);
            node.push_children([then]);
        }
        if self.at(";") && self.peek_is(1, "else") {
            self.bump();
        }
        if self.at("else") {
            self.bump();
            let otherwise = self.parse_branch(neg_guards);
            node.push_children([otherwise]);
        } else if jumps && !neg_guards.is_empty() {
            self.rest_guards = Some((if_pos, neg_guards));
        }
        node
    }

    fn parse_when(&mut self) -> SyntaxNode {
        let kw = self.bump();
        let mut node = SyntaxNode::new(NodeKind::WhenExpr, Span::new(kw.line, kw.line));
        let mut subject: Option<String> = None;
        if self.at("(") {
            let close = self.matching_close(self.pos).unwrap_or(self.limit);
            self.bump();
            let nodes = self.with_limit(close, |p| {
                if p.at("val") || p.at("var") {
                    let line = p.line();
                    let decl = p.parse_property(Vec::new(), Scope::Local, line);
                    let mut rest = decl;
                    rest.extend(p.parse_expr_all());
                    rest
                } else {
                    if p.pos + 1 == close && p.at_kind(TokenKind::Identifier) {
                        subject = Some(p.peek(0).unwrap().text.to_string());
                    }
                    p.parse_expr_all()
                }
            });
            if subject.is_none() {
                subject = nodes
                    .iter()
                    .find(|n| n.kind == NodeKind::VariableDecl)
                    .and_then(|n| n.attrs.name.clone());
            }
            node.push_children(nodes);
            self.pos = close;
            if self.at(")") {
                self.bump();
            }
        }
        if !self.at("{") {
            return node;
        }
        self.bump();
        loop {
            while self.at(";") {
                self.bump();
            }
            if self.at("}") {
                self.bump();
                break;
            }
            if self.eof() {
                break;
            }
            let before = self.pos;
            let mut conditions = 0;
            let mut guard: Option<String> = None;
            loop {
                conditions += 1;
                if self.at("else") {
                    self.bump();
                } else if self.at("is") {
                    self.bump();
                    self.skip_type();
                    guard = subject.clone();
                } else if self.at("!") && self.peek_is(1, "is") {
                    self.bump();
                    self.bump();
                    self.skip_type();
                } else if subject.is_some() {
                    let nodes = self.parse_expr(Stop::WHEN_CONDITION);
                    node.push_children(nodes);
                } else {
                    let end = self.condition_end();
                    let start = self.pos;
                    let (nodes, positive, _) = self.parse_condition(start, end);
                    node.push_children(nodes);
                    guard = positive.into_iter().next();
                    if self.pos < end {
                        self.pos = end;
                    }
                }
                if self.at(",") {
                    self.bump();
                    continue;
                }
                break;
            }
            let guards = if conditions == 1 { guard.into_iter().collect() } else { Vec::new() };
            if self.at("->") {
                self.bump();
                let body = self.parse_branch(guards);
                node.push_children([body]);
            } else if self.pos == before {
                self.skip_degraded();
            }
        }
        node.span = node.span.union(&self.span_from(kw.line));
        node
    }

    /// End of a subject-less when condition: the next top-level `,` or `->`.
    fn condition_end(&self) -> usize {
        let mut depth = 0i32;
        for i in self.pos..self.limit {
            let t = &self.toks[i];
            if t.kind != TokenKind::Operator {
                continue;
            }
            match t.text {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => {
                    if depth == 0 {
                        return i;
                    }
                    depth -= 1;
                }
                "," | "->" if depth == 0 => return i,
                _ => {}
            }
        }
        self.limit
    }

    fn parse_try(&mut self) -> SyntaxNode {
        let kw = self.bump();
        let mut node = SyntaxNode::new(NodeKind::Other, Span::new(kw.line, kw.line)).with_operator("try");
        if self.at("{") {
            let body = self.parse_block(Vec::new());
            node.push_children([body]);
        }
        loop {
            if self.at_ident("catch") && self.peek_is(1, "(") {
                self.bump();
                let params = self.parse_delimited();
                node.push_children(params);
                if self.at("{") {
                    let body = self.parse_block(Vec::new());
                    node.push_children([body]);
                }
            } else if self.at_ident("finally") && self.peek_is(1, "{") {
                self.bump();
                let body = self.parse_block(Vec::new());
                node.push_children([body]);
            } else {
                break;
            }
        }
        node
    }

    fn parse_for(&mut self) -> SyntaxNode {
        let kw = self.bump();
        let mut node = SyntaxNode::new(NodeKind::Other, Span::new(kw.line, kw.line)).with_operator("for");
        if self.at("(") {
            let close = self.matching_close(self.pos).unwrap_or(self.limit);
            self.bump();
            let nodes = self.with_limit(close, |p| {
                let mut out = Vec::new();
                p.skip_annotations();
                if p.at("(") {
                    let line = p.line();
                    out.push(p.parse_destructuring(line));
                } else if p.at_kind(TokenKind::Identifier) {
                    p.bump();
                }
                if p.at(":") {
                    p.bump();
                    p.skip_type();
                }
                if p.at("in") {
                    p.bump();
                }
                out.extend(p.parse_expr_all());
                out
            });
            node.push_children(nodes);
            self.pos = close;
            if self.at(")") {
                self.bump();
            }
        }
        if !self.eof() && !self.at(";") && !self.at("}") {
            let body = self.parse_branch(Vec::new());
            node.push_children([body]);
        }
        node
    }

    fn parse_while(&mut self) -> SyntaxNode {
        let kw = self.bump();
        let mut node = SyntaxNode::new(NodeKind::Other, Span::new(kw.line, kw.line)).with_operator("while");
        if self.at("(") {
            let cond = self.parse_delimited();
            node.push_children(cond);
        }
        if !self.eof() && !self.at(";") && !self.at("}") {
            let body = self.parse_branch(Vec::new());
            node.push_children([body]);
        }
        node
    }

    fn parse_do(&mut self) -> SyntaxNode {
        let kw = self.bump();
        let mut node = SyntaxNode::new(NodeKind::Other, Span::new(kw.line, kw.line)).with_operator("do");
        if !self.at("while") {
            let body = self.parse_branch(Vec::new());
            node.push_children([body]);
        }
        if self.at("while") {
            self.bump();
            if self.at("(") {
                let cond = self.parse_delimited();
                node.push_children(cond);
            }
        }
        node
    }

    // ---- strings -----------------------------------------------------------

    fn string_node(&mut self, tok: &Tok<'a>) -> SyntaxNode {
        let mut node = SyntaxNode::new(NodeKind::StringLiteral, Span::new(tok.line, tok.end_line));
        let text = tok.text;
        let bytes = text.as_bytes();
        let raw = text.starts_with("\"\"\"");
        let mut i = if raw { 3 } else { 1 };
        let mut line = tok.line;
        let mut column = tok.column + i as u32;
        let mut entries = Vec::new();
        while i < bytes.len() {
            match bytes[i] {
                b'\\' if !raw => {
                    i += 2;
                    column += 2;
                    continue;
                }
                b'$' if bytes.get(i + 1) == Some(&b'{') => {
                    let end = skip_template_hole(bytes, i + 2);
                    let inner_end = if bytes.get(end - 1) == Some(&b'}') { end - 1 } else { end };
                    let inner = &text[i + 2..inner_end.max(i + 2)];
                    let sub_tokens = tokenize_at(inner, line, column + 2, tok.offset + i + 2);
                    let mut sub = Parser::new(&sub_tokens, self.depth + 1);
                    let kids = sub.parse_expr_all();
                    self.degraded += sub.degraded;
                    let end_line = sub_tokens.last().map_or(line, Token::end_line);
                    let mut entry = SyntaxNode::new(NodeKind::StringTemplateEntry, Span::new(line, end_line));
                    entry.push_children(kids);
                    entries.push(entry);
                    for ch in text[i..end].chars() {
                        if ch == '\n' {
                            line += 1;
                            column = 1;
                        } else {
                            column += 1;
                        }
                    }
                    i = end;
                    continue;
                }
                b'$' if text[i + 1..].chars().next().is_some_and(|c| c == '_' || c.is_alphabetic()) => {
                    let end = skip_ident(text, i + 1);
                    entries.push(
                        SyntaxNode::new(NodeKind::StringTemplateEntry, Span::new(line, line)).with_name(&text[i + 1..end]),
                    );
                    column += text[i..end].chars().count() as u32;
                    i = end;
                    continue;
                }
                b'\n' => {
                    line += 1;
                    column = 1;
                }
                b if b & 0xC0 != 0x80 => column += 1,
                _ => {}
            }
            i += 1;
        }
        node.push_children(entries);
        node
    }
}

fn modifier_node(name: &str, line: u32) -> SyntaxNode {
    SyntaxNode::new(NodeKind::Modifier, Span::new(line, line)).with_name(name)
}
