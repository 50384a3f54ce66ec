//! Error-tolerant SPARQL tokenizer and cursor context derivation.

mod connect;
mod context;
mod token;

pub use connect::{connected_individuals, Direction, PathStep};
pub use context::{
    derive_context, expand_prefixed_name, ClausePosition, ContextError, PatternNode, QueryContext, TriplePattern,
};
pub(crate) use context::unescape_iri_prefix;
pub use token::{tokenize, Token, TokenKind};
