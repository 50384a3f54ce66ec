use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::token::{tokenize, Token, TokenKind};
use crate::rdf::{resolve_iri, vocab, Iri, Literal};

/// A node of a triple pattern.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternNode {
    /// Variable name without the `?`/`$` sigil.
    Var(String),
    Iri(Iri),
    Literal(Literal),
    Blank(String),
}

impl PatternNode {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            PatternNode::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            PatternNode::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for PatternNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternNode::Var(v) => write!(f, "?{v}"),
            PatternNode::Iri(iri) => write!(f, "<{iri}>"),
            PatternNode::Literal(lit) => {
                write!(f, "{:?}", lit.lexical())?;
                if let Some(lang) = lit.lang() {
                    write!(f, "@{lang}")?;
                } else if let Some(dt) = lit.datatype() {
                    write!(f, "^^<{dt}>")?;
                }
                Ok(())
            }
            PatternNode::Blank(b) => write!(f, "_:{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: PatternNode,
    pub predicate: PatternNode,
    pub object: PatternNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClausePosition {
    Subject,
    Predicate,
    Object,
    Keyword,
    Prologue,
    Unknown,
}

impl ClausePosition {
    pub fn as_str(self) -> &'static str {
        match self {
            ClausePosition::Subject => "SUBJECT_POS",
            ClausePosition::Predicate => "PREDICATE_POS",
            ClausePosition::Object => "OBJECT_POS",
            ClausePosition::Keyword => "KEYWORD_POS",
            ClausePosition::Prologue => "PROLOGUE_POS",
            ClausePosition::Unknown => "UNKNOWN",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "SUBJECT_POS" => ClausePosition::Subject,
            "PREDICATE_POS" => ClausePosition::Predicate,
            "OBJECT_POS" => ClausePosition::Object,
            "KEYWORD_POS" => ClausePosition::Keyword,
            "PROLOGUE_POS" => ClausePosition::Prologue,
            "UNKNOWN" => ClausePosition::Unknown,
            _ => return None,
        })
    }
}

impl fmt::Display for ClausePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything derivable from the query text left of the cursor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryContext {
    pub prefixes: BTreeMap<String, Iri>,
    pub base: Option<Iri>,
    pub from_graphs: Vec<Iri>,
    pub from_named: Vec<Iri>,
    /// Variable names in order of first appearance.
    pub variables: Vec<String>,
    pub patterns: Vec<TriplePattern>,
    pub position: ClausePosition,
    pub partial_token: String,
    pub focus_subject: Option<PatternNode>,
    pub focus_predicate: Option<PatternNode>,
    pub in_string: bool,
    pub in_comment: bool,
    /// Syntax keywords the grammar accepts at the cursor.
    pub keywords: Vec<&'static str>,
    /// Byte offset of the cursor (clamped to a character boundary).
    pub cursor: usize,
}

impl QueryContext {
    fn empty(cursor: usize) -> Self {
        QueryContext {
            prefixes: BTreeMap::new(),
            base: None,
            from_graphs: Vec::new(),
            from_named: Vec::new(),
            variables: Vec::new(),
            patterns: Vec::new(),
            position: ClausePosition::Prologue,
            partial_token: String::new(),
            focus_subject: None,
            focus_predicate: None,
            in_string: false,
            in_comment: false,
            keywords: Vec::new(),
            cursor,
        }
    }

    /// Byte offset where `partial_token` starts.
    pub fn partial_start(&self) -> usize {
        self.cursor - self.partial_token.len()
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.variables.iter().any(|v| v == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContextError {
    #[error("unknown prefix '{0}:'")]
    UnknownPrefix(String),
    #[error("not a prefixed name: {0:?}")]
    NotPrefixedName(String),
    #[error("expansion of {0:?} is not a valid IRI")]
    InvalidExpansion(String),
}

/// Resolves `prefix:local` against the prefixes declared in `ctx`.
pub fn expand_prefixed_name(ctx: &QueryContext, pname: &str) -> Result<Iri, ContextError> {
    let Some((prefix, local)) = pname.split_once(':') else {
        return Err(ContextError::NotPrefixedName(pname.to_string()));
    };
    let ns = ctx
        .prefixes
        .get(prefix)
        .ok_or_else(|| ContextError::UnknownPrefix(prefix.to_string()))?;
    let iri = format!("{ns}{}", unescape_local(local));
    Iri::new(iri).map_err(|_| ContextError::InvalidExpansion(pname.to_string()))
}

fn unescape_local(local: &str) -> String {
    let mut out = String::with_capacity(local.len());
    let mut chars = local.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(e) = chars.next() {
                out.push(e);
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub(crate) fn unescape_iriref(body: &str) -> Option<String> {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            let len = match chars.next()? {
                'u' => 4,
                'U' => 8,
                _ => return None,
            };
            let mut v = 0u32;
            for _ in 0..len {
                v = v * 16 + chars.next()?.to_digit(16)?;
            }
            out.push(char::from_u32(v)?);
        } else {
            out.push(c);
        }
    }
    Some(out)
}

/// Unescapes the body of a partially typed IRI reference; a truncated
/// escape at the end is dropped.
pub(crate) fn unescape_iri_prefix(body: &str) -> Option<String> {
    let cut = match body.rfind('\\') {
        Some(i) => {
            let need = match body[i + 1..].chars().next() {
                Some('u') => 6,
                Some('U') => 10,
                Some(_) => return None,
                None => 1,
            };
            if body.len() - i < need {
                i
            } else {
                body.len()
            }
        }
        None => body.len(),
    };
    unescape_iriref(&body[..cut])
}

/// Derives the grammatical context at byte offset `cursor`.
///
/// Only `text[..cursor]` is examined. A cursor past the end is clamped and a
/// cursor inside a multi-byte character is moved back to its start.
pub fn derive_context(text: &str, cursor: usize) -> QueryContext {
    let mut cursor = cursor.min(text.len());
    while !text.is_char_boundary(cursor) {
        cursor -= 1;
    }
    let prefix = &text[..cursor];
    let tokens = tokenize(prefix);
    let mut ctx = QueryContext::empty(cursor);

    let mut body: &[Token<'_>] = &tokens;
    let mut forced_unknown = false;
    if let Some(last) = tokens.last() {
        match last.kind {
            TokenKind::Var | TokenKind::IriRef | TokenKind::PName | TokenKind::Keyword | TokenKind::AKeyword => {
                ctx.partial_token = last.text.to_string();
                body = &tokens[..tokens.len() - 1];
            }
            TokenKind::Incomplete if last.text.starts_with('<') => {
                ctx.partial_token = last.text.to_string();
                body = &tokens[..tokens.len() - 1];
            }
            TokenKind::Incomplete => {
                ctx.in_string = true;
                forced_unknown = true;
                body = &tokens[..tokens.len() - 1];
            }
            TokenKind::Comment => {
                ctx.in_comment = true;
                forced_unknown = true;
            }
            TokenKind::BlankLabel | TokenKind::Number | TokenKind::LangTag => {
                forced_unknown = true;
                body = &tokens[..tokens.len() - 1];
            }
            _ => {}
        }
    }

    let significant: Vec<Token<'_>> = body.iter().copied().filter(|t| !t.kind.is_trivia()).collect();
    let mut parser = Parser::new(&mut ctx);
    let mut i = 0;
    while i < significant.len() {
        i = parser.step(&significant, i);
    }
    let (position, focus_subject, focus_predicate, keywords) = parser.finish();
    if forced_unknown {
        ctx.position = ClausePosition::Unknown;
        ctx.keywords = Vec::new();
    } else {
        ctx.position = position;
        ctx.focus_subject = focus_subject;
        ctx.focus_predicate = focus_predicate;
        ctx.keywords = keywords;
    }
    ctx
}

/// `None` marks a term that was present but could not be resolved (for
/// example an undeclared prefix); such patterns are dropped.
type Slot = Option<PatternNode>;

#[derive(Debug, Clone)]
enum Clause {
    Subject { after_group: bool },
    Predicate { subject: Slot },
    Object { subject: Slot, predicate: Slot },
    AfterObject { subject: Slot, predicate: Slot },
    Garbage { subject: Option<Slot>, predicate: Option<Slot> },
    /// After OPTIONAL / MINUS / UNION: expecting `{`.
    ExpectGroup,
    /// After GRAPH / SERVICE: expecting a graph name, then `{`.
    GraphName { named: bool },
    /// FILTER, BIND or VALUES body; `depth` counts open brackets.
    Expression { depth: usize, opened: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrameKind {
    Where,
    Nested,
    Template,
}

#[derive(Debug, Clone)]
struct Frame {
    kind: FrameKind,
    clause: Clause,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Prologue,
    PrefixName,
    PrefixIri,
    BaseIri,
    Select { started: bool, distinct_allowed: bool },
    SelectExpr { depth: usize },
    Describe,
    Construct,
    From { named: bool },
    Dataset,
    WhereKeyword,
    Modifiers,
    OrderBy { has_key: bool },
    OrderExpr { depth: usize },
    LimitValue { offset: bool },
    Garbage,
}

struct Parser<'c> {
    ctx: &'c mut QueryContext,
    phase: Phase,
    pending_prefix: Option<String>,
    frames: Vec<Frame>,
    form_seen: bool,
    limit_used: bool,
    offset_used: bool,
    order_used: bool,
}

impl<'c> Parser<'c> {
    fn new(ctx: &'c mut QueryContext) -> Self {
        Parser {
            ctx,
            phase: Phase::Prologue,
            pending_prefix: None,
            frames: Vec::new(),
            form_seen: false,
            limit_used: false,
            offset_used: false,
            order_used: false,
        }
    }

    fn note_variable(&mut self, tok: &Token<'_>) {
        if tok.kind == TokenKind::Var && tok.text.len() > 1 {
            let name = &tok.text[1..];
            if !self.ctx.has_variable(name) {
                self.ctx.variables.push(name.to_string());
            }
        }
    }

    fn resolve_iri_token(&self, tok: &Token<'_>) -> Option<Iri> {
        match tok.kind {
            TokenKind::IriRef => {
                let body = unescape_iriref(&tok.text[1..tok.text.len() - 1])?;
                let resolved = resolve_iri(&body, self.ctx.base.as_ref())?;
                Iri::new(resolved).ok()
            }
            TokenKind::PName => expand_prefixed_name(self.ctx, tok.text).ok(),
            _ => None,
        }
    }

    /// Parses an RDF term starting at `i`. Returns the slot and the index
    /// after the term, or `None` if the token cannot start a term.
    fn term(&self, toks: &[Token<'_>], i: usize) -> Option<(Slot, usize)> {
        let tok = toks[i];
        match tok.kind {
            TokenKind::Var if tok.text.len() > 1 => Some((Some(PatternNode::Var(tok.text[1..].to_string())), i + 1)),
            TokenKind::IriRef | TokenKind::PName => {
                Some((self.resolve_iri_token(&tok).map(PatternNode::Iri), i + 1))
            }
            TokenKind::BlankLabel if tok.text.len() > 2 => {
                Some((Some(PatternNode::Blank(tok.text[2..].to_string())), i + 1))
            }
            TokenKind::Number => {
                let dt = if tok.text.contains(['e', 'E']) {
                    vocab::XSD_DOUBLE
                } else if tok.text.contains('.') {
                    vocab::XSD_DECIMAL
                } else {
                    vocab::XSD_INTEGER
                };
                let lit = Literal::typed(tok.text, Iri::new_unchecked(dt.to_string()));
                Some((Some(PatternNode::Literal(lit)), i + 1))
            }
            TokenKind::Keyword if tok.text == "true" || tok.text == "false" => {
                let lit = Literal::typed(tok.text, Iri::new_unchecked(vocab::XSD_BOOLEAN.to_string()));
                Some((Some(PatternNode::Literal(lit)), i + 1))
            }
            TokenKind::String => {
                let lexical = string_body(tok.text);
                match toks.get(i + 1) {
                    Some(next) if next.kind == TokenKind::LangTag => {
                        let slot = Literal::lang_tagged(lexical, &next.text[1..]).ok().map(PatternNode::Literal);
                        Some((slot, i + 2))
                    }
                    Some(next) if next.kind == TokenKind::Punct && next.text == "^^" => match toks.get(i + 2) {
                        Some(dt) if matches!(dt.kind, TokenKind::IriRef | TokenKind::PName) => {
                            let slot = self
                                .resolve_iri_token(dt)
                                .map(|dt| PatternNode::Literal(Literal::typed(lexical, dt)));
                            Some((slot, i + 3))
                        }
                        // `"x"^^` with the datatype still to come
                        _ => Some((None, i + 2)),
                    },
                    _ => Some((Some(PatternNode::Literal(Literal::simple(lexical))), i + 1)),
                }
            }
            _ => None,
        }
    }

    fn step(&mut self, toks: &[Token<'_>], i: usize) -> usize {
        let tok = toks[i];
        self.note_variable(&tok);
        if self.frames.is_empty() {
            self.step_top(toks, i)
        } else {
            self.step_group(toks, i)
        }
    }

    fn push_group(&mut self, kind: FrameKind) {
        self.frames.push(Frame {
            kind,
            clause: Clause::Subject { after_group: false },
        });
    }

    fn pop_group(&mut self) {
        let closed = self.frames.pop();
        match self.frames.last_mut() {
            Some(parent) => {
                parent.clause = Clause::Subject { after_group: true };
            }
            None => {
                self.phase = match closed.map(|f| f.kind) {
                    Some(FrameKind::Template) => Phase::Dataset,
                    _ => Phase::Modifiers,
                };
            }
        }
    }

    fn step_top(&mut self, toks: &[Token<'_>], i: usize) -> usize {
        let tok = toks[i];
        let kw = keyword(&tok);
        let is = |k: &str| kw.as_deref() == Some(k);

        // keywords that start a new clause regardless of the current phase
        if !matches!(self.phase, Phase::SelectExpr { .. } | Phase::OrderExpr { .. }) {
            if is("PREFIX") && !self.form_seen {
                self.phase = Phase::PrefixName;
                return i + 1;
            }
            if is("BASE") && !self.form_seen {
                self.phase = Phase::BaseIri;
                return i + 1;
            }
            if is("SELECT") && !self.form_seen {
                self.form_seen = true;
                self.phase = Phase::Select {
                    started: false,
                    distinct_allowed: true,
                };
                return i + 1;
            }
            if is("ASK") && !self.form_seen {
                self.form_seen = true;
                self.phase = Phase::Dataset;
                return i + 1;
            }
            if is("CONSTRUCT") && !self.form_seen {
                self.form_seen = true;
                self.phase = Phase::Construct;
                return i + 1;
            }
            if is("DESCRIBE") && !self.form_seen {
                self.form_seen = true;
                self.phase = Phase::Describe;
                return i + 1;
            }
            if self.form_seen && !matches!(self.phase, Phase::Modifiers | Phase::OrderBy { .. } | Phase::LimitValue { .. }) {
                if is("FROM") {
                    self.phase = Phase::From { named: false };
                    return i + 1;
                }
                if is("FROM NAMED") {
                    self.phase = Phase::From { named: true };
                    return i + 1;
                }
                if is("WHERE") {
                    self.phase = Phase::WhereKeyword;
                    return i + 1;
                }
            }
        }

        if tok.kind == TokenKind::Punct && tok.text == "{" {
            match self.phase {
                Phase::Construct => {
                    self.push_group(FrameKind::Template);
                    return i + 1;
                }
                Phase::SelectExpr { .. } | Phase::OrderExpr { .. } => {}
                Phase::Modifiers | Phase::OrderBy { .. } | Phase::LimitValue { .. } => {
                    self.phase = Phase::Garbage;
                    return i + 1;
                }
                _ => {
                    self.form_seen = true;
                    self.push_group(FrameKind::Where);
                    return i + 1;
                }
            }
        }

        self.phase = match self.phase {
            Phase::Prologue | Phase::Garbage => Phase::Garbage,
            Phase::PrefixName => {
                if tok.kind == TokenKind::PName && tok.text.ends_with(':') && tok.text.matches(':').count() == 1 {
                    self.pending_prefix = Some(tok.text[..tok.text.len() - 1].to_string());
                    Phase::PrefixIri
                } else {
                    Phase::Garbage
                }
            }
            Phase::PrefixIri => {
                let name = self.pending_prefix.take();
                match (name, tok.kind) {
                    (Some(name), TokenKind::IriRef) => match self.resolve_iri_token(&tok) {
                        Some(iri) => {
                            self.ctx.prefixes.insert(name, iri);
                            Phase::Prologue
                        }
                        None => Phase::Garbage,
                    },
                    _ => Phase::Garbage,
                }
            }
            Phase::BaseIri => match (tok.kind, self.resolve_iri_token(&tok)) {
                (TokenKind::IriRef, Some(iri)) => {
                    self.ctx.base = Some(iri);
                    Phase::Prologue
                }
                _ => Phase::Garbage,
            },
            Phase::Select {
                started,
                distinct_allowed,
            } => {
                if distinct_allowed && (is("DISTINCT") || is("REDUCED")) {
                    Phase::Select {
                        started,
                        distinct_allowed: false,
                    }
                } else if tok.kind == TokenKind::Var || (tok.kind == TokenKind::Punct && tok.text == "*") {
                    Phase::Select {
                        started: true,
                        distinct_allowed: false,
                    }
                } else if tok.kind == TokenKind::Punct && tok.text == "(" {
                    Phase::SelectExpr { depth: 1 }
                } else {
                    Phase::Garbage
                }
            }
            Phase::SelectExpr { depth } => match (tok.kind, tok.text) {
                (TokenKind::Punct, "(") => Phase::SelectExpr { depth: depth + 1 },
                (TokenKind::Punct, ")") if depth == 1 => Phase::Select {
                    started: true,
                    distinct_allowed: false,
                },
                (TokenKind::Punct, ")") => Phase::SelectExpr { depth: depth - 1 },
                _ => Phase::SelectExpr { depth },
            },
            Phase::Describe => match tok.kind {
                TokenKind::Var | TokenKind::IriRef | TokenKind::PName => Phase::Describe,
                TokenKind::Punct if tok.text == "*" => Phase::Describe,
                _ => Phase::Garbage,
            },
            Phase::Construct => Phase::Garbage,
            Phase::From { named } => match self.resolve_iri_token(&tok) {
                Some(iri) => {
                    let list = if named {
                        &mut self.ctx.from_named
                    } else {
                        &mut self.ctx.from_graphs
                    };
                    if !list.contains(&iri) {
                        list.push(iri);
                    }
                    Phase::Dataset
                }
                None if !named && is("NAMED") => Phase::From { named: true },
                None => Phase::Garbage,
            },
            Phase::Dataset | Phase::WhereKeyword => Phase::Garbage,
            Phase::Modifiers | Phase::OrderBy { .. } | Phase::LimitValue { .. } => {
                self.modifiers(&tok, kw.as_deref())
            }
            Phase::OrderExpr { depth } => match (tok.kind, tok.text) {
                (TokenKind::Punct, "(") => Phase::OrderExpr { depth: depth + 1 },
                (TokenKind::Punct, ")") if depth == 1 => Phase::OrderBy { has_key: true },
                (TokenKind::Punct, ")") => Phase::OrderExpr { depth: depth - 1 },
                _ => Phase::OrderExpr { depth },
            },
        };
        i + 1
    }

    fn modifiers(&mut self, tok: &Token<'_>, kw: Option<&str>) -> Phase {
        match (self.phase, kw) {
            (Phase::LimitValue { offset }, _) => {
                if tok.kind == TokenKind::Number {
                    if offset {
                        self.offset_used = true;
                    } else {
                        self.limit_used = true;
                    }
                    Phase::Modifiers
                } else {
                    Phase::Garbage
                }
            }
            (_, Some("ORDER BY")) if !self.order_used => {
                self.order_used = true;
                Phase::OrderBy { has_key: false }
            }
            (_, Some("GROUP BY")) => Phase::OrderBy { has_key: false },
            (_, Some("LIMIT")) if !self.limit_used => Phase::LimitValue { offset: false },
            (_, Some("OFFSET")) if !self.offset_used => Phase::LimitValue { offset: true },
            (Phase::OrderBy { .. }, Some("ASC" | "DESC")) => Phase::OrderBy { has_key: false },
            (Phase::OrderBy { .. }, _) if tok.kind == TokenKind::Var => Phase::OrderBy { has_key: true },
            (Phase::OrderBy { .. }, _) if tok.kind == TokenKind::Punct && tok.text == "(" => {
                Phase::OrderExpr { depth: 1 }
            }
            _ => Phase::Garbage,
        }
    }

    fn step_group(&mut self, toks: &[Token<'_>], i: usize) -> usize {
        let tok = toks[i];
        let frame = self.frames.last().expect("in group");
        if frame.kind == FrameKind::Template {
            match (tok.kind, tok.text) {
                (TokenKind::Punct, "{") => self.push_group(FrameKind::Template),
                (TokenKind::Punct, "}") => self.pop_group(),
                _ => {}
            }
            return i + 1;
        }
        let clause = frame.clause.clone();
        let punct = if tok.kind == TokenKind::Punct { Some(tok.text) } else { None };

        // expression bodies swallow everything until their brackets balance
        if let Clause::Expression { depth, opened } = clause {
            let next = match punct {
                Some("(" | "{" | "[") => Clause::Expression {
                    depth: depth + 1,
                    opened: true,
                },
                Some(")" | "}" | "]") if depth > 1 => Clause::Expression {
                    depth: depth - 1,
                    opened,
                },
                Some(")" | "]") if depth == 1 => Clause::Subject { after_group: false },
                Some("}") if depth == 1 => Clause::Subject { after_group: true },
                Some("}") => {
                    // unbalanced: the enclosing group closes
                    self.pop_group();
                    return i + 1;
                }
                Some(".") if depth == 0 => Clause::Subject { after_group: false },
                _ => Clause::Expression { depth, opened },
            };
            self.set_clause(next);
            return i + 1;
        }

        // resynchronisation points shared by every clause state
        match punct {
            Some("{") => {
                self.push_group(FrameKind::Nested);
                return i + 1;
            }
            Some("}") => {
                self.pop_group();
                return i + 1;
            }
            Some(".") => {
                self.set_clause(Clause::Subject { after_group: false });
                return i + 1;
            }
            _ => {}
        }

        if let Some(next) = self.group_keyword(&tok, &clause) {
            self.set_clause(next);
            return i + 1;
        }

        let (next, advance) = match clause {
            Clause::Subject { .. } => match self.term(toks, i) {
                Some((subject, next_i)) => (Clause::Predicate { subject }, next_i),
                None => (
                    Clause::Garbage {
                        subject: None,
                        predicate: None,
                    },
                    i + 1,
                ),
            },
            Clause::Predicate { subject } => match (tok.kind, punct) {
                (TokenKind::Var, _) if tok.text.len() > 1 => (
                    Clause::Object {
                        subject,
                        predicate: Some(PatternNode::Var(tok.text[1..].to_string())),
                    },
                    i + 1,
                ),
                (TokenKind::IriRef | TokenKind::PName, _) => (
                    Clause::Object {
                        subject,
                        predicate: self.resolve_iri_token(&tok).map(PatternNode::Iri),
                    },
                    i + 1,
                ),
                (TokenKind::AKeyword, _) => (
                    Clause::Object {
                        subject,
                        predicate: Some(PatternNode::Iri(Iri::new_unchecked(vocab::RDF_TYPE.to_string()))),
                    },
                    i + 1,
                ),
                (_, Some(";")) => (Clause::Predicate { subject }, i + 1),
                _ => (
                    Clause::Garbage {
                        subject: Some(subject),
                        predicate: None,
                    },
                    i + 1,
                ),
            },
            Clause::Object { subject, predicate } => match punct {
                Some(";") => (Clause::Predicate { subject }, i + 1),
                Some(",") => (Clause::Object { subject, predicate }, i + 1),
                _ => match self.term(toks, i) {
                    Some((object, next_i)) => {
                        if let (Some(s), Some(p), Some(o)) = (&subject, &predicate, &object) {
                            self.ctx.patterns.push(TriplePattern {
                                subject: s.clone(),
                                predicate: p.clone(),
                                object: o.clone(),
                            });
                        }
                        // variables inside a consumed literal datatype are impossible,
                        // but lookahead tokens still need to be noted
                        for t in &toks[i + 1..next_i] {
                            self.note_variable(t);
                        }
                        (Clause::AfterObject { subject, predicate }, next_i)
                    }
                    None => (
                        Clause::Garbage {
                            subject: Some(subject),
                            predicate: Some(predicate),
                        },
                        i + 1,
                    ),
                },
            },
            Clause::AfterObject { subject, predicate } => match punct {
                Some(";") => (Clause::Predicate { subject }, i + 1),
                Some(",") => (Clause::Object { subject, predicate }, i + 1),
                _ => (
                    Clause::Garbage {
                        subject: Some(subject),
                        predicate: Some(predicate),
                    },
                    i + 1,
                ),
            },
            Clause::Garbage { subject, predicate } => match (punct, subject, predicate) {
                (Some(";"), Some(subject), _) => (Clause::Predicate { subject }, i + 1),
                (Some(","), Some(subject), Some(predicate)) => (Clause::Object { subject, predicate }, i + 1),
                (_, subject, predicate) => (Clause::Garbage { subject, predicate }, i + 1),
            },
            Clause::ExpectGroup => (
                Clause::Garbage {
                    subject: None,
                    predicate: None,
                },
                i + 1,
            ),
            Clause::GraphName { named } => {
                let is_name = matches!(tok.kind, TokenKind::Var | TokenKind::IriRef | TokenKind::PName);
                if !named && is_name {
                    (Clause::GraphName { named: true }, i + 1)
                } else if !named && keyword(&tok).as_deref() == Some("SILENT") {
                    (Clause::GraphName { named: false }, i + 1)
                } else {
                    (
                        Clause::Garbage {
                            subject: None,
                            predicate: None,
                        },
                        i + 1,
                    )
                }
            }
            Clause::Expression { .. } => unreachable!("handled above"),
        };
        self.set_clause(next);
        advance
    }

    /// Group-level keywords accepted where a new triple block may start.
    fn group_keyword(&self, tok: &Token<'_>, clause: &Clause) -> Option<Clause> {
        if !matches!(clause, Clause::Subject { .. } | Clause::AfterObject { .. }) {
            return None;
        }
        let kw = keyword(tok)?;
        Some(match kw.as_str() {
            "OPTIONAL" | "MINUS" | "UNION" => Clause::ExpectGroup,
            "GRAPH" | "SERVICE" => Clause::GraphName { named: false },
            "FILTER" | "BIND" | "VALUES" => Clause::Expression {
                depth: 0,
                opened: false,
            },
            _ => return None,
        })
    }

    fn set_clause(&mut self, clause: Clause) {
        if let Some(frame) = self.frames.last_mut() {
            frame.clause = clause;
        }
    }

    fn finish(self) -> (ClausePosition, Option<PatternNode>, Option<PatternNode>, Vec<&'static str>) {
        use ClausePosition as P;
        if let Some(frame) = self.frames.last() {
            if frame.kind == FrameKind::Template {
                return (P::Unknown, None, None, Vec::new());
            }
            return match &frame.clause {
                Clause::Subject { after_group } => {
                    let mut kws = alloc::vec!["FILTER", "GRAPH", "OPTIONAL"];
                    if *after_group {
                        kws.push("UNION");
                    }
                    (P::Subject, None, None, kws)
                }
                Clause::Predicate { subject } => (P::Predicate, subject.clone(), None, alloc::vec!["a"]),
                Clause::Object { subject, predicate } => {
                    (P::Object, subject.clone(), predicate.clone(), Vec::new())
                }
                Clause::AfterObject { .. } => (P::Keyword, None, None, alloc::vec!["FILTER", "GRAPH", "OPTIONAL"]),
                Clause::Expression { .. }
                | Clause::Garbage { .. }
                | Clause::ExpectGroup
                | Clause::GraphName { .. } => (P::Unknown, None, None, Vec::new()),
            };
        }
        let kws: Vec<&'static str> = match self.phase {
            Phase::Prologue => alloc::vec!["ASK", "BASE", "PREFIX", "SELECT"],
            Phase::Select { started: false, distinct_allowed } => {
                if distinct_allowed {
                    alloc::vec!["DISTINCT"]
                } else {
                    Vec::new()
                }
            }
            Phase::Select { started: true, .. } | Phase::Dataset | Phase::Describe => {
                alloc::vec!["FROM", "FROM NAMED", "WHERE"]
            }
            Phase::Modifiers => {
                let mut v = Vec::new();
                if !self.limit_used {
                    v.push("LIMIT");
                }
                if !self.offset_used {
                    v.push("OFFSET");
                }
                if !self.order_used {
                    v.push("ORDER BY");
                }
                v
            }
            Phase::OrderBy { has_key } => {
                let mut v = alloc::vec!["ASC", "DESC"];
                if has_key {
                    if !self.limit_used {
                        v.push("LIMIT");
                    }
                    if !self.offset_used {
                        v.push("OFFSET");
                    }
                }
                v
            }
            _ => Vec::new(),
        };
        let position = match self.phase {
            Phase::Prologue => P::Prologue,
            Phase::Select { .. }
            | Phase::Dataset
            | Phase::Describe
            | Phase::Modifiers
            | Phase::OrderBy { .. } => P::Keyword,
            Phase::PrefixName
            | Phase::PrefixIri
            | Phase::BaseIri
            | Phase::SelectExpr { .. }
            | Phase::OrderExpr { .. }
            | Phase::Construct
            | Phase::From { .. }
            | Phase::WhereKeyword
            | Phase::LimitValue { .. }
            | Phase::Garbage => P::Unknown,
        };
        (position, None, None, kws)
    }
}

/// Uppercased keyword text with inner whitespace collapsed, for bare words.
fn keyword(tok: &Token<'_>) -> Option<String> {
    if tok.kind != TokenKind::Keyword {
        return None;
    }
    let mut out = String::with_capacity(tok.text.len());
    for (n, part) in tok.text.split_whitespace().enumerate() {
        if n > 0 {
            out.push(' ');
        }
        out.push_str(&part.to_ascii_uppercase());
    }
    Some(out)
}

fn string_body(text: &str) -> String {
    let quote_len = if text.starts_with("\"\"\"") || text.starts_with("'''") { 3 } else { 1 };
    let inner = &text[quote_len..text.len() - quote_len];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('b') => out.push('\u{8}'),
            Some('f') => out.push('\u{c}'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn at_end(text: &str) -> QueryContext {
        derive_context(text, text.len())
    }

    fn var(v: &str) -> PatternNode {
        PatternNode::Var(v.to_string())
    }

    #[test]
    fn empty_text_is_prologue() {
        let ctx = derive_context("", 0);
        assert_eq!(ctx.position, ClausePosition::Prologue);
        assert!(ctx.variables.is_empty() && ctx.patterns.is_empty() && ctx.prefixes.is_empty());
        assert_eq!(ctx.partial_token, "");
    }

    #[test]
    fn group_start() {
        let ctx = derive_context("SELECT * WHERE { ", 17);
        assert_eq!(ctx.position, ClausePosition::Subject);
        assert!(ctx.variables.is_empty());
        assert_eq!(ctx.partial_token, "");
    }

    #[test]
    fn after_subject() {
        let ctx = derive_context("SELECT * WHERE { ?p ", 20);
        assert_eq!(ctx.position, ClausePosition::Predicate);
        assert_eq!(ctx.variables, vec!["p".to_string()]);
        assert_eq!(ctx.focus_subject, Some(var("p")));
    }

    #[test]
    fn pname_partial_at_predicate() {
        let ctx = at_end("PREFIX sio: <http://semanticscience.org/resource/> SELECT ?x WHERE { ?x sio:");
        assert_eq!(ctx.position, ClausePosition::Predicate);
        assert_eq!(ctx.partial_token, "sio:");
        assert_eq!(ctx.prefixes["sio"].as_str(), "http://semanticscience.org/resource/");
        assert_eq!(ctx.focus_subject, Some(var("x")));
    }

    #[test]
    fn from_graph() {
        let ctx = at_end("SELECT ?x FROM <http://g> WHERE { ?x ");
        assert_eq!(ctx.from_graphs, vec![Iri::new("http://g").unwrap()]);
        assert_eq!(ctx.position, ClausePosition::Predicate);
    }

    #[test]
    fn continuations() {
        let ctx = at_end("SELECT * WHERE { ?s <http://x/p> ?o ; ");
        assert_eq!(ctx.position, ClausePosition::Predicate);
        assert_eq!(ctx.focus_subject, Some(var("s")));
        assert_eq!(ctx.patterns.len(), 1);

        let ctx = at_end("SELECT * WHERE { ?s <http://x/p> ?o , ");
        assert_eq!(ctx.position, ClausePosition::Object);
        assert_eq!(ctx.focus_predicate, Some(PatternNode::Iri(Iri::new("http://x/p").unwrap())));
    }

    #[test]
    fn a_is_rdf_type() {
        let ctx = at_end("SELECT * WHERE { ?s a ");
        assert_eq!(ctx.position, ClausePosition::Object);
        assert_eq!(ctx.focus_predicate.unwrap().as_iri().unwrap().as_str(), vocab::RDF_TYPE);
    }

    #[test]
    fn filter_is_unknown_and_resumes() {
        assert_eq!(at_end("SELECT * WHERE { FILTER(?x > ").position, ClausePosition::Unknown);
        let ctx = at_end("SELECT * WHERE { FILTER(?x > 1) ?y ");
        assert_eq!(ctx.position, ClausePosition::Predicate);
        assert_eq!(ctx.variables, vec!["x".to_string(), "y".to_string()]);
    }

    #[test]
    fn nested_optional() {
        let ctx = at_end("SELECT * WHERE { ?s ?p ?o OPTIONAL { ?s <http://x/q> ");
        assert_eq!(ctx.position, ClausePosition::Object);
        assert_eq!(ctx.patterns.len(), 1);
        let ctx = at_end("SELECT * WHERE { OPTIONAL { ?a ?b ?c } ");
        assert_eq!(ctx.position, ClausePosition::Subject);
    }

    #[test]
    fn garbage_recovers_at_period() {
        let ctx = at_end("SELECT * WHERE { ?s ) ?o . ?t ");
        assert_eq!(ctx.position, ClausePosition::Predicate);
        assert!(ctx.patterns.is_empty());
        assert_eq!(ctx.focus_subject, Some(var("t")));
    }

    #[test]
    fn unknown_prefix_drops_pattern_but_advances() {
        let ctx = at_end("SELECT * WHERE { ?s nope:p ");
        assert_eq!(ctx.position, ClausePosition::Object);
        assert_eq!(ctx.focus_predicate, None);
        let ctx = at_end("SELECT * WHERE { ?s nope:p ?o . ");
        assert!(ctx.patterns.is_empty());
    }

    #[test]
    fn string_and_comment_states() {
        let ctx = at_end("SELECT * WHERE { ?s ?p \"abc");
        assert!(ctx.in_string);
        assert_eq!(ctx.position, ClausePosition::Unknown);
        let ctx = at_end("SELECT * WHERE { # note");
        assert!(ctx.in_comment);
        assert_eq!(ctx.position, ClausePosition::Unknown);
    }

    #[test]
    fn dollar_and_question_are_one_variable() {
        let ctx = at_end("SELECT ?x WHERE { $x ");
        assert_eq!(ctx.variables, vec!["x".to_string()]);
    }

    #[test]
    fn cursor_is_clamped_and_rounded() {
        let text = "SELECT * WHERE { ?é";
        let ctx = derive_context(text, text.len() - 1);
        assert_eq!(ctx.cursor, text.len() - 2);
        assert_eq!(derive_context(text, 999).cursor, text.len());
    }

    #[test]
    fn keyword_vocabulary() {
        assert_eq!(derive_context("", 0).keywords, vec!["ASK", "BASE", "PREFIX", "SELECT"]);
        assert_eq!(at_end("SELECT * ").keywords, vec!["FROM", "FROM NAMED", "WHERE"]);
        assert_eq!(at_end("SELECT * WHERE { ?s ?p ?o } ").keywords, vec!["LIMIT", "OFFSET", "ORDER BY"]);
    }

    #[test]
    fn expansion() {
        let ctx = at_end("PREFIX dc: <http://purl.org/dc/elements/1.1/> PREFIX : <http://e/> SELECT");
        assert_eq!(
            expand_prefixed_name(&ctx, "dc:title").unwrap().as_str(),
            "http://purl.org/dc/elements/1.1/title"
        );
        assert_eq!(expand_prefixed_name(&ctx, ":x").unwrap().as_str(), "http://e/x");
        assert_eq!(
            expand_prefixed_name(&ctx, "nope:x"),
            Err(ContextError::UnknownPrefix("nope".to_string()))
        );
    }

    #[test]
    fn relative_iris_resolve_against_base() {
        let ctx = at_end("BASE <http://e/dir/> PREFIX x: <ns#> SELECT * FROM <g> WHERE {");
        assert_eq!(ctx.prefixes["x"].as_str(), "http://e/dir/ns#");
        assert_eq!(ctx.from_graphs[0].as_str(), "http://e/dir/g");
    }
}
