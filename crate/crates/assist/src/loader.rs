//! Loading graphs from files and URLs, with caching and failure tracking.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use sparql_assist_core::rdf::{parse_ntriples_with, NtMode};
use sparql_assist_core::{parse_turtle, Graph, Iri, KnowledgeBase, LoadStatus, QueryContext};

use crate::cache::DiskCache;
use crate::fetch::{FetchError, FetchRequest, FetchResponse, Fetcher};

pub const DOCUMENT_ACCEPT: &str = "text/turtle, application/n-triples;q=0.9, */*;q=0.1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchPolicy {
    pub timeout: Duration,
    pub max_bytes: u64,
    pub cache_dir: Option<PathBuf>,
    pub cache_ttl: Duration,
    pub allow_network: bool,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        FetchPolicy {
            timeout: Duration::from_secs(10),
            max_bytes: 32 * 1024 * 1024,
            cache_dir: None,
            cache_ttl: Duration::from_secs(24 * 3600),
            allow_network: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOutcome {
    /// IRI the graph is recorded under.
    pub source: String,
    pub graph: Graph,
    pub diagnostics: Vec<String>,
    pub status: LoadStatus,
    pub from_cache: bool,
}

impl LoadOutcome {
    fn failed(source: &str, reason: impl Into<String>) -> Self {
        LoadOutcome {
            source: source.to_string(),
            graph: Graph::new(),
            diagnostics: Vec::new(),
            status: LoadStatus::Failed(reason.into()),
            from_cache: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Syntax {
    Turtle,
    NTriples,
    RdfXml,
}

/// Parser choice: content type, then file extension, then the first bytes.
pub fn choose_syntax(content_type: Option<&str>, location: &str, body: &[u8]) -> Syntax {
    if let Some(ct) = content_type {
        let mime = ct.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
        match mime.as_str() {
            "text/turtle" | "application/x-turtle" | "application/turtle" => return Syntax::Turtle,
            "application/n-triples" | "text/n-triples" => return Syntax::NTriples,
            "application/rdf+xml" => return Syntax::RdfXml,
            _ => {}
        }
    }
    let path = location.split(['?', '#']).next().unwrap_or(location);
    match Path::new(path).extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("ttl") => return Syntax::Turtle,
        Some("nt") => return Syntax::NTriples,
        Some("rdf") => return Syntax::RdfXml,
        _ => {}
    }
    sniff(body)
}

fn sniff(body: &[u8]) -> Syntax {
    let text = String::from_utf8_lossy(&body[..body.len().min(4096)]);
    let text = text.trim_start_matches('\u{feff}');
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with("<?xml") || line.starts_with("<rdf:RDF") {
            return Syntax::RdfXml;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@prefix") || lower.starts_with("prefix") || lower.starts_with("@base") {
            return Syntax::Turtle;
        }
        // one complete statement per line with absolute IRIs reads as N-Triples
        if line.starts_with('<') || line.starts_with("_:") {
            return Syntax::NTriples;
        }
        return Syntax::Turtle;
    }
    Syntax::Turtle
}

/// Parses a document. N-Triples is read leniently with bad lines reported
/// as diagnostics.
pub fn parse_document(body: &[u8], syntax: Syntax, base: Option<&Iri>) -> Result<(Graph, Vec<String>), String> {
    let text = std::str::from_utf8(body).map_err(|e| format!("invalid UTF-8: {e}"))?;
    match syntax {
        Syntax::RdfXml => Err("RDF/XML is not supported".to_string()),
        Syntax::Turtle => parse_turtle(text, base).map(|g| (g, Vec::new())).map_err(|e| e.to_string()),
        Syntax::NTriples => parse_ntriples_with(text, NtMode::Lenient)
            .map(|out| (out.graph, out.diagnostics.iter().map(ToString::to_string).collect()))
            .map_err(|e| e.to_string()),
    }
}

/// Loads graphs through an injected [`Fetcher`], honouring the policy.
pub struct Loader {
    fetcher: Arc<dyn Fetcher>,
    policy: FetchPolicy,
    cache: Option<DiskCache>,
    failures: Mutex<HashMap<String, Instant>>,
}

impl std::fmt::Debug for Loader {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Loader").field("policy", &self.policy).finish_non_exhaustive()
    }
}

enum Location {
    Remote(String),
    File(PathBuf),
}

fn classify(source: &str) -> Result<Location, String> {
    let lower = source.to_ascii_lowercase();
    if lower.starts_with("http://") || lower.starts_with("https://") {
        return Ok(Location::Remote(source.to_string()));
    }
    if let Some(rest) = source.strip_prefix("file://") {
        return Ok(Location::File(PathBuf::from(rest)));
    }
    if Iri::new(source).is_ok() && !Path::new(source).exists() && !source.contains('\\') {
        let scheme = source.split(':').next().unwrap_or("");
        // Windows drive letters look like one-letter schemes
        if scheme.len() > 1 {
            return Err(format!("unsupported scheme '{scheme}'"));
        }
    }
    Ok(Location::File(PathBuf::from(source)))
}

fn file_iri(path: &Path) -> String {
    let abs = std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
    format!("file://{}", abs.display())
}

impl Loader {
    pub fn new(fetcher: Arc<dyn Fetcher>, policy: FetchPolicy) -> Self {
        let cache = policy.cache_dir.clone().map(DiskCache::new);
        Loader {
            fetcher,
            policy,
            cache,
            failures: Mutex::new(HashMap::new()),
        }
    }

    pub fn policy(&self) -> &FetchPolicy {
        &self.policy
    }

    /// IRI a source is recorded under: URLs as given, files as `file://`.
    pub fn source_iri(source: &str) -> String {
        match classify(source) {
            Ok(Location::File(path)) => file_iri(&path),
            _ => source.to_string(),
        }
    }

    /// One GET through the fetcher, refused when the network is disabled.
    pub fn fetch(&self, url: &str, accept: &str) -> Result<FetchResponse, FetchError> {
        if !self.policy.allow_network {
            return Err(FetchError::NetworkDisabled);
        }
        self.fetcher.fetch(&FetchRequest {
            url: url.to_string(),
            accept: accept.to_string(),
            timeout: self.policy.timeout,
            max_bytes: self.policy.max_bytes,
        })
    }

    /// False while a failure of `source` is younger than the cache TTL.
    pub fn retry_allowed(&self, source: &str) -> bool {
        let failures = self.failures.lock().expect("failure map poisoned");
        failures
            .get(source)
            .is_none_or(|at| at.elapsed() >= self.policy.cache_ttl)
    }

    fn record(&self, outcome: &LoadOutcome) {
        let mut failures = self.failures.lock().expect("failure map poisoned");
        match outcome.status {
            LoadStatus::Failed(_) => {
                failures.insert(outcome.source.clone(), Instant::now());
            }
            _ => {
                failures.remove(&outcome.source);
            }
        }
    }

    /// Loads a file path or URL. Never fails; problems are reported in the
    /// outcome's status.
    pub fn load_graph(&self, source: &str) -> LoadOutcome {
        let outcome = match classify(source) {
            Err(reason) => LoadOutcome::failed(source, reason),
            Ok(Location::File(path)) => self.load_file(&path),
            Ok(Location::Remote(url)) => self.load_remote(&url),
        };
        self.record(&outcome);
        outcome
    }

    fn load_file(&self, path: &Path) -> LoadOutcome {
        let source = file_iri(path);
        let body = match std::fs::read(path) {
            Ok(body) => body,
            Err(e) => return LoadOutcome::failed(&source, format!("{}: {e}", path.display())),
        };
        if body.len() as u64 > self.policy.max_bytes {
            return LoadOutcome::failed(&source, FetchError::TooLarge(self.policy.max_bytes).to_string());
        }
        let syntax = choose_syntax(None, &path.to_string_lossy(), &body);
        finish(&source, &body, syntax, false)
    }

    fn load_remote(&self, url: &str) -> LoadOutcome {
        let cached = self.cache.as_ref().and_then(|c| c.get(url));
        if let Some(doc) = &cached {
            if doc.age() < self.policy.cache_ttl || !self.policy.allow_network {
                let syntax = choose_syntax(doc.content_type.as_deref(), url, &doc.body);
                return finish(url, &doc.body, syntax, true);
            }
        }
        match self.fetch(url, DOCUMENT_ACCEPT) {
            Ok(response) => {
                if let Some(cache) = &self.cache {
                    if let Err(e) = cache.put(url, response.content_type.as_deref(), &response.body) {
                        tracing::warn!(url, error = %e, "could not write cache entry");
                    }
                }
                let syntax = choose_syntax(response.content_type.as_deref(), &response.final_url, &response.body);
                finish(url, &response.body, syntax, false)
            }
            Err(err) => match cached {
                // a stale copy beats nothing
                Some(doc) => {
                    let syntax = choose_syntax(doc.content_type.as_deref(), url, &doc.body);
                    let mut outcome = finish(url, &doc.body, syntax, true);
                    outcome.diagnostics.push(format!("refresh failed: {err}"));
                    outcome
                }
                None => LoadOutcome::failed(url, err.to_string()),
            },
        }
    }
}

fn finish(source: &str, body: &[u8], syntax: Syntax, from_cache: bool) -> LoadOutcome {
    let base = Iri::new(source).ok();
    match parse_document(body, syntax, base.as_ref()) {
        Ok((mut graph, diagnostics)) => {
            graph.set_source(base);
            LoadOutcome {
                source: source.to_string(),
                graph,
                diagnostics,
                status: LoadStatus::Loaded,
                from_cache,
            }
        }
        Err(reason) => {
            let mut outcome = LoadOutcome::failed(source, reason);
            outcome.from_cache = from_cache;
            outcome
        }
    }
}

/// Graph IRIs named by the query's dataset clauses that still need loading.
pub fn pending_graphs(ctx: &QueryContext, kb: &KnowledgeBase, loader: &Loader, include_named: bool) -> Vec<Iri> {
    let mut out: Vec<Iri> = Vec::new();
    let named = if include_named { ctx.from_named.as_slice() } else { &[] };
    for iri in ctx.from_graphs.iter().chain(named) {
        if out.contains(iri) {
            continue;
        }
        let wanted = match kb.loaded_graphs.get(iri) {
            Some(LoadStatus::Loaded) | Some(LoadStatus::Pending) => false,
            Some(LoadStatus::Failed(_)) => loader.retry_allowed(iri.as_str()),
            None => loader.retry_allowed(iri.as_str()),
        };
        if wanted {
            out.push(iri.clone());
        }
    }
    out
}

/// Adds the outcomes to `kb` as one new generation, recording each status.
pub fn publish(kb: &KnowledgeBase, outcomes: &[(Iri, LoadOutcome)]) -> KnowledgeBase {
    let graphs = outcomes
        .iter()
        .filter(|(_, o)| o.status == LoadStatus::Loaded)
        .map(|(_, o)| &o.graph);
    let mut next = kb.ingest_all(graphs, Vec::new());
    for (iri, outcome) in outcomes {
        next.set_status(iri.clone(), outcome.status.clone());
    }
    next
}

/// Loads every FROM (and optionally FROM NAMED) graph not yet loaded and
/// returns the updated knowledge base. Failures are recorded, not raised.
pub fn ensure_from_graphs(ctx: &QueryContext, kb: &KnowledgeBase, loader: &Loader, include_named: bool) -> KnowledgeBase {
    let pending = pending_graphs(ctx, kb, loader, include_named);
    if pending.is_empty() {
        return kb.clone();
    }
    let outcomes: Vec<(Iri, LoadOutcome)> = pending
        .into_iter()
        .map(|iri| {
            let outcome = loader.load_graph(iri.as_str());
            (iri, outcome)
        })
        .collect();
    publish(kb, &outcomes)
}
