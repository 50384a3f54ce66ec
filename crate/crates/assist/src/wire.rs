//! JSON request and response bodies, shared by the HTTP server and the CLI.

use serde::{Deserialize, Serialize};
use sparql_assist_core::{derive_context, suggest, KnowledgeBase, LangPref, QueryContext, Registry, SuggestOptions, Suggestion};

use crate::config::Limits;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestRequest {
    pub query: String,
    /// Byte offset into the UTF-8 encoding of `query`.
    pub cursor: usize,
    #[serde(default)]
    pub langs: Option<Vec<String>>,
    #[serde(default)]
    pub limit: Option<usize>,
    #[serde(default)]
    pub registry: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSummary {
    pub position: String,
    pub variables: Vec<String>,
    pub from_graphs: Vec<String>,
    pub partial_token: String,
    pub focus_subject: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireProvenance {
    pub kind: String,
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireSuggestion {
    pub insert_text: String,
    pub display_label: String,
    pub description: Option<String>,
    pub iri: Option<String>,
    pub kind: String,
    pub lang: String,
    pub provenance: WireProvenance,
}

/// Timing and memo status travel in response headers so that bodies stay
/// byte-identical across repeated requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestResponse {
    pub context: ContextSummary,
    pub suggestions: Vec<WireSuggestion>,
    pub generation: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RequestError {
    #[error("cursor {cursor} is beyond the query length {len}")]
    CursorOutOfRange { cursor: usize, len: usize },
    #[error("limit {limit} exceeds the maximum {max}")]
    LimitOutOfRange { limit: usize, max: usize },
    #[error("query is {len} bytes, the maximum is {max}")]
    QueryTooLarge { len: usize, max: usize },
}

impl RequestError {
    pub fn code(&self) -> &'static str {
        match self {
            RequestError::CursorOutOfRange { .. } => "cursor_out_of_range",
            RequestError::LimitOutOfRange { .. } => "limit_out_of_range",
            RequestError::QueryTooLarge { .. } => "payload_too_large",
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            error: self.code().to_string(),
            message: self.to_string(),
        }
    }
}

/// Defaults applied to fields the request leaves out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defaults {
    pub langs: LangPref,
    pub limits: Limits,
}

impl Defaults {
    pub fn new(langs: LangPref, limits: Limits) -> Self {
        Defaults { langs, limits }
    }
}

impl SuggestRequest {
    pub fn new(query: impl Into<String>, cursor: usize) -> Self {
        SuggestRequest {
            query: query.into(),
            cursor,
            langs: None,
            limit: None,
            registry: None,
        }
    }

    pub fn validate(&self, limits: &Limits) -> Result<(), RequestError> {
        if self.query.len() > limits.max_query_bytes {
            return Err(RequestError::QueryTooLarge {
                len: self.query.len(),
                max: limits.max_query_bytes,
            });
        }
        if self.cursor > self.query.len() {
            return Err(RequestError::CursorOutOfRange {
                cursor: self.cursor,
                len: self.query.len(),
            });
        }
        if let Some(limit) = self.limit {
            if limit > limits.max_limit {
                return Err(RequestError::LimitOutOfRange {
                    limit,
                    max: limits.max_limit,
                });
            }
        }
        Ok(())
    }

    pub fn options(&self, defaults: &Defaults) -> SuggestOptions {
        SuggestOptions {
            langs: self.langs.as_ref().map_or_else(|| defaults.langs.clone(), |l| LangPref::new(l.iter())),
            limit: self.limit.unwrap_or(defaults.limits.default_limit),
            registry_enabled: self.registry.unwrap_or(false),
            ..SuggestOptions::default()
        }
    }

    pub fn context(&self) -> QueryContext {
        derive_context(&self.query, self.cursor)
    }
}

impl From<&QueryContext> for ContextSummary {
    fn from(ctx: &QueryContext) -> Self {
        ContextSummary {
            position: ctx.position.as_str().to_string(),
            variables: ctx.variables.clone(),
            from_graphs: ctx.from_graphs.iter().map(|g| g.as_str().to_string()).collect(),
            partial_token: ctx.partial_token.clone(),
            focus_subject: ctx.focus_subject.as_ref().map(ToString::to_string),
        }
    }
}

impl From<&Suggestion> for WireSuggestion {
    fn from(s: &Suggestion) -> Self {
        WireSuggestion {
            insert_text: s.insert_text.clone(),
            display_label: s.display_label.clone(),
            description: s.description.clone(),
            iri: s.iri.as_ref().map(|i| i.as_str().to_string()),
            kind: s.kind.as_str().to_string(),
            lang: s.lang.clone(),
            provenance: WireProvenance {
                kind: s.provenance.kind_str().to_string(),
                source: s.provenance.source().map(|i| i.as_str().to_string()),
            },
        }
    }
}

/// Runs the engine for an already validated request whose context has been
/// derived. The HTTP handler and the CLI both end here.
pub fn respond_with_context(
    req: &SuggestRequest,
    ctx: &QueryContext,
    kb: &KnowledgeBase,
    registry: Option<&Registry>,
    defaults: &Defaults,
) -> SuggestResponse {
    let opts = req.options(defaults);
    let suggestions = suggest(ctx, kb, registry, &opts);
    SuggestResponse {
        context: ContextSummary::from(ctx),
        suggestions: suggestions.iter().map(WireSuggestion::from).collect(),
        generation: kb.generation(),
    }
}

/// Validates, derives the context and runs the engine against `kb`.
pub fn respond(
    req: &SuggestRequest,
    kb: &KnowledgeBase,
    registry: Option<&Registry>,
    defaults: &Defaults,
) -> Result<SuggestResponse, RequestError> {
    req.validate(&defaults.limits)?;
    let ctx = req.context();
    Ok(respond_with_context(req, &ctx, kb, registry, defaults))
}
