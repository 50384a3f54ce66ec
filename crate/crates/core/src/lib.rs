//! Context-sensitive completion for SPARQL queries.
//!
//! The crate is `no_std` (with `alloc`) and contains everything that does not
//! touch the network or the file system:
//!
//! * [`rdf`]: a minimal RDF model with N-Triples and Turtle-subset readers.
//! * [`sparql`]: an error-tolerant tokenizer and the cursor context derivation
//!   for partially typed queries.
//! * [`index`]: multilingual label index with normalized prefix search.
//! * [`kb`]: term and profile extraction from graphs, the knowledge-base snapshot.
//! * [`suggest`]: the ranking engine, syntax suggestions, service-registry
//!   filtering and the splice applied when a suggestion is accepted.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub(crate) mod chars;
pub mod index;
pub mod kb;
pub mod rdf;
pub mod sparql;
pub mod suggest;

pub use index::{build_index, normalize_label, KindSet, LangPref, Term, TermIndex, TermKind};
pub use kb::{extract_profiles, extract_terms, knowledge_base_from, KnowledgeBase, LoadStatus};
pub use rdf::{graph_merge, parse_ntriples, parse_turtle, Graph, Iri, Literal, Node, Triple};
pub use sparql::{
    connected_individuals, derive_context, expand_prefixed_name, tokenize, ClausePosition, QueryContext, Token,
    TokenKind,
};
pub use suggest::{
    apply_suggestion, registry_filter, suggest, suggest_syntax, Provenance, Registry, RegistryService, ScoreTuple,
    SuggestOptions, Suggestion,
};
