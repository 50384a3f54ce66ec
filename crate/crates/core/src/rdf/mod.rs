//! Minimal RDF data model plus N-Triples and Turtle-subset readers.

mod ntriples;
mod scan;
mod turtle;
mod write;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use ntriples::{parse_ntriples, parse_ntriples_with, NtMode, NtOutput};
pub use turtle::parse_turtle;
pub use write::{to_ntriples, to_turtle};

/// Well-known vocabulary IRIs.
pub mod vocab {
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
    pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDF_PROPERTY: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";
    pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const RDFS_COMMENT: &str = "http://www.w3.org/2000/01/rdf-schema#comment";
    pub const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
    pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
    pub const OWL_ANNOTATION_PROPERTY: &str = "http://www.w3.org/2002/07/owl#AnnotationProperty";
    pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RdfError {
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid language tag {0:?}")]
    InvalidLangTag(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    TurtleSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: unsupported construct: {construct}")]
    Unsupported {
        line: usize,
        column: usize,
        construct: &'static str,
    },
}

/// An absolute IRI. Compared by exact string equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, RdfError> {
        let value = value.into();
        if is_valid_iri(&value) {
            Ok(Iri(value))
        } else {
            Err(RdfError::InvalidIri(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Text after the last `#` or `/`.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        match s.rfind(['#', '/']) {
            Some(i) => &s[i + 1..],
            None => s.rsplit(':').next().unwrap_or(s),
        }
    }

    pub(crate) fn new_unchecked(value: String) -> Self {
        debug_assert!(is_valid_iri(&value), "{value}");
        Iri(value)
    }
}

fn is_valid_iri(s: &str) -> bool {
    if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == '<' || c == '>') {
        return false;
    }
    // scheme ":" ...
    let Some(colon) = s.find(':') else {
        return false;
    };
    let scheme = &s[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl core::borrow::Borrow<str> for Iri {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl TryFrom<&str> for Iri {
    type Error = RdfError;
    fn try_from(value: &str) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

/// Lowercases and validates a BCP-47 style tag.
pub fn normalize_lang_tag(tag: &str) -> Result<String, RdfError> {
    let lower = tag.to_ascii_lowercase();
    let mut parts = lower.split('-');
    let first_ok = parts
        .next()
        .is_some_and(|p| (1..=8).contains(&p.len()) && p.bytes().all(|b| b.is_ascii_lowercase()));
    let rest_ok = parts.all(|p| {
        (1..=8).contains(&p.len()) && p.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
    });
    if first_ok && rest_ok {
        Ok(lower)
    } else {
        Err(RdfError::InvalidLangTag(tag.to_string()))
    }
}

/// A literal. Language tag and datatype are mutually exclusive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    lang: Option<String>,
    datatype: Option<Iri>,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            lang: None,
            datatype: None,
        }
    }

    pub fn lang_tagged(lexical: impl Into<String>, lang: &str) -> Result<Self, RdfError> {
        Ok(Literal {
            lexical: lexical.into(),
            lang: Some(normalize_lang_tag(lang)?),
            datatype: None,
        })
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal {
            lexical: lexical.into(),
            lang: None,
            datatype: Some(datatype),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn lang(&self) -> Option<&str> {
        self.lang.as_deref()
    }

    pub fn datatype(&self) -> Option<&Iri> {
        self.datatype.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Iri(Iri),
    /// Blank node label, scoped to the document that produced it.
    Blank(String),
    Literal(Literal),
}

impl Node {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Node::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Node::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn iri(value: &str) -> Result<Node, RdfError> {
        Iri::new(value).map(Node::Iri)
    }
}

impl From<Iri> for Node {
    fn from(iri: Iri) -> Self {
        Node::Iri(iri)
    }
}

impl From<Literal> for Node {
    fn from(lit: Literal) -> Self {
        Node::Literal(lit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Node,
    predicate: Iri,
    object: Node,
}

impl Triple {
    /// Returns `None` when the subject is a literal.
    pub fn new(subject: Node, predicate: Iri, object: Node) -> Option<Self> {
        if matches!(subject, Node::Literal(_)) {
            return None;
        }
        Some(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Node {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Node {
        &self.object
    }
}

/// A set of triples, optionally tagged with the IRI it was loaded from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    source: Option<Iri>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_source(source: Iri) -> Self {
        Graph {
            triples: BTreeSet::new(),
            source: Some(source),
        }
    }

    pub fn source(&self) -> Option<&Iri> {
        self.source.as_ref()
    }

    pub fn set_source(&mut self, source: Option<Iri>) {
        self.source = source;
    }

    /// Returns `false` if the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> + '_ {
        self.triples.iter()
    }

    fn has_blank_nodes(&self) -> bool {
        self.triples.iter().any(|t| {
            matches!(t.subject, Node::Blank(_)) || matches!(t.object, Node::Blank(_))
        })
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = alloc::collections::btree_set::Iter<'a, Triple>;
    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<T: IntoIterator<Item = Triple>>(iter: T) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
            source: None,
        }
    }
}

/// Set union of graphs.
///
/// Graphs with the same `source` share one blank-node scope, as do identical
/// graphs; any other graph without a source is its own scope. When two or more scopes contribute blank nodes,
/// every blank label is rewritten as `g{n}_{label}` where `n` numbers the
/// scopes in order of first appearance. The result keeps a source only if all
/// non-empty inputs agree on it.
pub fn graph_merge<'a, I>(graphs: I) -> Graph
where
    I: IntoIterator<Item = &'a Graph>,
{
    let graphs: Vec<&Graph> = graphs.into_iter().collect();

    // scope id per input graph
    let mut scope_of_source: BTreeMap<&Iri, usize> = BTreeMap::new();
    let mut scopes = Vec::with_capacity(graphs.len());
    let mut next_scope = 0usize;
    for g in &graphs {
        let scope = match &g.source {
            Some(src) => *scope_of_source.entry(src).or_insert_with(|| {
                next_scope += 1;
                next_scope - 1
            }),
            None => match graphs.iter().zip(&scopes).find(|(earlier, _)| *earlier == g) {
                Some((_, &scope)) => scope,
                None => {
                    next_scope += 1;
                    next_scope - 1
                }
            },
        };
        scopes.push(scope);
    }

    let blank_scopes: BTreeSet<usize> = graphs
        .iter()
        .zip(&scopes)
        .filter(|(g, _)| g.has_blank_nodes())
        .map(|(_, s)| *s)
        .collect();
    // renumber so the prefixes are dense over scopes that actually carry blanks
    let rename: BTreeMap<usize, usize> = if blank_scopes.len() > 1 {
        blank_scopes.iter().enumerate().map(|(i, s)| (*s, i)).collect()
    } else {
        BTreeMap::new()
    };

    let mut merged = Graph::new();
    let mut sources: BTreeSet<&Iri> = BTreeSet::new();
    let mut unsourced_nonempty = false;
    for (g, scope) in graphs.iter().zip(&scopes) {
        if !g.is_empty() {
            match &g.source {
                Some(s) => {
                    sources.insert(s);
                }
                None => unsourced_nonempty = true,
            }
        }
        match rename.get(scope) {
            None => merged.triples.extend(g.triples.iter().cloned()),
            Some(n) => {
                for t in &g.triples {
                    merged.triples.insert(Triple {
                        subject: relabel(&t.subject, *n),
                        predicate: t.predicate.clone(),
                        object: relabel(&t.object, *n),
                    });
                }
            }
        }
    }
    if sources.len() == 1 && !unsourced_nonempty {
        merged.source = sources.into_iter().next().cloned();
    }
    merged
}

fn relabel(node: &Node, scope: usize) -> Node {
    match node {
        Node::Blank(label) => Node::Blank(format!("g{scope}_{label}")),
        other => other.clone(),
    }
}

/// Resolves a possibly relative IRI reference against `base`.
///
/// Handles the reference forms that occur in practice (`#frag`, `/path`,
/// `//authority`, relative paths with `.`/`..` segments, `?query`).
pub(crate) fn resolve_iri(reference: &str, base: Option<&Iri>) -> Option<String> {
    if has_scheme(reference) {
        return Some(reference.to_string());
    }
    let base = base?.as_str();
    let (scheme, rest) = base.split_once(':')?;
    if let Some(stripped) = reference.strip_prefix("//") {
        return Some(format!("{scheme}://{stripped}"));
    }
    let (authority, path_and_more) = match rest.strip_prefix("//") {
        Some(after) => {
            let end = after.find(['/', '?', '#']).unwrap_or(after.len());
            (Some(&after[..end]), &after[end..])
        }
        None => (None, rest),
    };
    let prefix = match authority {
        Some(a) => format!("{scheme}://{a}"),
        None => format!("{scheme}:"),
    };
    let base_path_q = path_and_more.split('#').next().unwrap_or("");
    let base_path = base_path_q.split('?').next().unwrap_or("");
    if reference.is_empty() {
        return Some(format!("{prefix}{base_path_q}"));
    }
    if reference.starts_with('#') {
        return Some(format!("{prefix}{base_path_q}{reference}"));
    }
    if reference.starts_with('?') {
        return Some(format!("{prefix}{base_path}{reference}"));
    }
    let (ref_path, suffix) = match reference.find(['?', '#']) {
        Some(i) => (&reference[..i], &reference[i..]),
        None => (reference, ""),
    };
    let merged = if ref_path.starts_with('/') {
        ref_path.to_string()
    } else {
        let dir = match base_path.rfind('/') {
            Some(i) => &base_path[..=i],
            None if authority.is_some() => "/",
            None => "",
        };
        format!("{dir}{ref_path}")
    };
    Some(format!("{prefix}{}{suffix}", remove_dot_segments(&merged)))
}

fn has_scheme(s: &str) -> bool {
    match s.find(':') {
        Some(i) => {
            let scheme = &s[..i];
            let mut chars = scheme.chars();
            matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
                && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        }
        None => false,
    }
}

fn remove_dot_segments(path: &str) -> String {
    let absolute = path.starts_with('/');
    let mut out: Vec<&str> = Vec::new();
    let segments: Vec<&str> = path.split('/').collect();
    let last = segments.len().saturating_sub(1);
    let mut trailing_slash = false;
    for (i, seg) in segments.iter().enumerate() {
        match *seg {
            "." => trailing_slash = i == last,
            ".." => {
                if out.len() > usize::from(absolute) {
                    out.pop();
                }
                trailing_slash = i == last;
            }
            s => {
                out.push(s);
                trailing_slash = false;
            }
        }
    }
    let mut joined = out.join("/");
    if absolute && !joined.starts_with('/') {
        joined.insert(0, '/');
    }
    if trailing_slash && !joined.ends_with('/') {
        joined.push('/');
    }
    joined
}
