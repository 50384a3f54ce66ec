//! HTTP service: snapshot lifecycle, on-the-fly FROM loading, response memo.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::body::{to_bytes, Body, Bytes};
use axum::extract::{ConnectInfo, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::future::{BoxFuture, FutureExt, Shared};
use lru::LruCache;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sparql_assist_core::{Iri, KnowledgeBase, LoadStatus, Registry};

use crate::config::ServiceConfig;
use crate::endpoint::preload_endpoint;
use crate::fetch::Fetcher;
use crate::loader::{self, LoadOutcome, Loader};
use crate::wire::{respond_with_context, Defaults, ErrorBody, RequestError, SuggestRequest, SuggestResponse};

pub const MEMO_CAPACITY: usize = 1024;
/// Room for the JSON envelope around a query of the maximum size.
const ENVELOPE_BYTES: usize = 4096;

pub const HEADER_CACHE: &str = "x-cache";
pub const HEADER_TIMING: &str = "x-timing-ms";
pub const HEADER_GENERATION: &str = "x-generation";

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("invalid config field `registry_path`: {0}")]
    Registry(String),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

/// A source given in the config that could not be pre-loaded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFailure {
    pub source: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Readiness {
    pub ready: bool,
    pub generation: u64,
    pub terms: usize,
    pub graphs_loaded: usize,
    pub failed_sources: Vec<SourceFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRequest {
    pub iri: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphResponse {
    pub iri: String,
    /// `loaded`, `failed` or `pending`.
    pub status: String,
    pub reason: Option<String>,
    pub terms: usize,
    pub generation: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct MemoKey {
    prefix: [u8; 32],
    langs: Vec<String>,
    limit: usize,
    registry: bool,
    generation: u64,
}

struct Memo {
    body: Bytes,
    timing_ms: f64,
    generation: u64,
}

type LoadFuture = Shared<BoxFuture<'static, LoadStatus>>;

pub struct AppState {
    kb: RwLock<Arc<KnowledgeBase>>,
    /// Serializes snapshot swaps.
    writer: Mutex<()>,
    registry: Option<Arc<Registry>>,
    loader: Arc<Loader>,
    defaults: Defaults,
    allow_remote_admin: bool,
    include_from_named: bool,
    budget: Duration,
    memo: Mutex<LruCache<MemoKey, Arc<Memo>>>,
    inflight: Mutex<HashMap<Iri, LoadFuture>>,
    ready: AtomicBool,
    failed_sources: Vec<SourceFailure>,
}

impl std::fmt::Debug for AppState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AppState")
            .field("generation", &self.snapshot().generation())
            .finish_non_exhaustive()
    }
}

fn status_name(status: &LoadStatus) -> &'static str {
    match status {
        LoadStatus::Loaded => "loaded",
        LoadStatus::Failed(_) => "failed",
        LoadStatus::Pending => "pending",
    }
}

/// Loads the registry and every configured source, then publishes the first
/// snapshot. Source failures are logged and listed in readiness.
pub async fn startup(config: &ServiceConfig, fetcher: Arc<dyn Fetcher>) -> Result<Arc<AppState>, StartupError> {
    config.validate()?;
    let registry = match &config.registry_path {
        Some(path) if path.exists() => {
            let parsed = std::fs::read_to_string(path)
                .map_err(|e| e.to_string())
                .and_then(|text| Registry::parse(&text).map_err(|e| e.to_string()));
            let registry = parsed.map_err(|e| StartupError::Registry(format!("{}: {e}", path.display())))?;
            Some(Arc::new(registry))
        }
        Some(path) => {
            tracing::warn!(path = %path.display(), "registry file not found, continuing without one");
            None
        }
        None => None,
    };
    let loader = Arc::new(Loader::new(fetcher, config.fetch_policy()));
    let owned = config.clone();
    let preload_loader = loader.clone();
    let (kb, failed_sources) = tokio::task::spawn_blocking(move || preload(&owned, &preload_loader))
        .await
        .expect("preload task panicked");
    Ok(AppState::assemble(config, kb, registry, loader, failed_sources))
}

/// Builds the initial knowledge base from the configured ontologies and
/// endpoints.
pub fn preload(config: &ServiceConfig, loader: &Loader) -> (KnowledgeBase, Vec<SourceFailure>) {
    let mut failures = Vec::new();
    let mut outcomes: Vec<(Iri, LoadOutcome)> = Vec::new();
    for source in &config.ontologies {
        let outcome = loader.load_graph(source);
        for d in &outcome.diagnostics {
            tracing::warn!(source = %source, "{d}");
        }
        if let LoadStatus::Failed(reason) = &outcome.status {
            tracing::warn!(source = %source, "could not load: {reason}");
            failures.push(SourceFailure {
                source: source.clone(),
                reason: reason.clone(),
            });
        }
        match Iri::new(outcome.source.clone()) {
            Ok(iri) => outcomes.push((iri, outcome)),
            Err(e) => tracing::warn!(source = %source, "source has no usable IRI: {e}"),
        }
    }
    let langs = config.lang_pref();
    let mut endpoint_terms = Vec::new();
    for source in config.endpoint_sources() {
        let harvested = preload_endpoint(&source, &langs, loader, config.row_cap);
        if let Some(reason) = harvested.error {
            tracing::warn!(endpoint = %source.url, "endpoint harvest stopped: {reason}");
            failures.push(SourceFailure {
                source: source.url.clone(),
                reason,
            });
        }
        endpoint_terms.extend(harvested.terms);
    }
    let graphs = outcomes
        .iter()
        .filter(|(_, o)| o.status == LoadStatus::Loaded)
        .map(|(_, o)| &o.graph);
    let mut kb = KnowledgeBase::new().ingest_all(graphs, endpoint_terms);
    for (iri, outcome) in outcomes {
        kb.set_status(iri, outcome.status);
    }
    (kb, failures)
}

fn prefix_digest(req: &SuggestRequest) -> [u8; 32] {
    Sha256::digest(&req.query.as_bytes()[..req.cursor]).into()
}

impl AppState {
    /// State around an existing knowledge base, skipping the configured
    /// sources. Used when embedding the service.
    pub fn from_parts(
        config: &ServiceConfig,
        kb: KnowledgeBase,
        registry: Option<Registry>,
        fetcher: Arc<dyn Fetcher>,
    ) -> Arc<AppState> {
        let loader = Arc::new(Loader::new(fetcher, config.fetch_policy()));
        AppState::assemble(config, kb, registry.map(Arc::new), loader, Vec::new())
    }

    fn assemble(
        config: &ServiceConfig,
        kb: KnowledgeBase,
        registry: Option<Arc<Registry>>,
        loader: Arc<Loader>,
        failed_sources: Vec<SourceFailure>,
    ) -> Arc<AppState> {
        Arc::new(AppState {
            kb: RwLock::new(Arc::new(kb)),
            writer: Mutex::new(()),
            registry,
            loader,
            defaults: Defaults::new(config.lang_pref(), config.limits.clone()),
            allow_remote_admin: config.allow_remote_admin,
            include_from_named: config.include_from_named,
            budget: config.from_budget(),
            memo: Mutex::new(LruCache::new(NonZeroUsize::new(MEMO_CAPACITY).expect("nonzero"))),
            inflight: Mutex::new(HashMap::new()),
            ready: AtomicBool::new(true),
            failed_sources,
        })
    }

    pub fn snapshot(&self) -> Arc<KnowledgeBase> {
        self.kb.read().expect("snapshot lock poisoned").clone()
    }

    pub fn registry(&self) -> Option<&Registry> {
        self.registry.as_deref()
    }

    pub fn defaults(&self) -> &Defaults {
        &self.defaults
    }

    pub fn loader(&self) -> &Loader {
        &self.loader
    }

    pub fn is_ready(&self) -> bool {
        self.ready.load(Ordering::SeqCst)
    }

    pub fn readiness(&self) -> Readiness {
        let kb = self.snapshot();
        Readiness {
            ready: self.is_ready(),
            generation: kb.generation(),
            terms: kb.index.terms().count(),
            graphs_loaded: kb.loaded_graphs.values().filter(|s| **s == LoadStatus::Loaded).count(),
            failed_sources: self.failed_sources.clone(),
        }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("memo lock poisoned").len()
    }

    fn publish(&self, outcomes: &[(Iri, LoadOutcome)]) {
        let _writer = self.writer.lock().expect("writer lock poisoned");
        let next = loader::publish(&self.snapshot(), outcomes);
        *self.kb.write().expect("snapshot lock poisoned") = Arc::new(next);
        self.memo.lock().expect("memo lock poisoned").clear();
    }

    /// Starts loading `iri` in the background, or joins a load already
    /// running. The future resolves once the result is published.
    fn start_load(self: &Arc<Self>, iri: Iri) -> LoadFuture {
        let mut inflight = self.inflight.lock().expect("inflight lock poisoned");
        if let Some(running) = inflight.get(&iri) {
            return running.clone();
        }
        let state = self.clone();
        let key = iri.clone();
        let task = tokio::spawn(async move {
            let loader = state.loader.clone();
            let source = key.clone();
            let outcome = tokio::task::spawn_blocking(move || loader.load_graph(source.as_str()))
                .await
                .unwrap_or_else(|e| LoadOutcome {
                    source: key.as_str().to_string(),
                    graph: Default::default(),
                    diagnostics: Vec::new(),
                    status: LoadStatus::Failed(format!("loader crashed: {e}")),
                    from_cache: false,
                });
            let status = outcome.status.clone();
            state.publish(&[(key.clone(), outcome)]);
            state.inflight.lock().expect("inflight lock poisoned").remove(&key);
            status
        });
        let future = async move { task.await.unwrap_or_else(|e| LoadStatus::Failed(e.to_string())) }
            .boxed()
            .shared();
        inflight.insert(iri, future.clone());
        future
    }

    /// Waits up to the budget for the FROM graphs of `req`. Loads that miss
    /// the budget keep running and publish later.
    async fn ensure_from_graphs(self: &Arc<Self>, ctx: &sparql_assist_core::QueryContext) {
        let kb = self.snapshot();
        let pending = loader::pending_graphs(ctx, &kb, &self.loader, self.include_from_named);
        if pending.is_empty() {
            return;
        }
        let loads: Vec<LoadFuture> = pending.into_iter().map(|iri| self.start_load(iri)).collect();
        if tokio::time::timeout(self.budget, futures::future::join_all(loads)).await.is_err() {
            tracing::info!(budget_ms = self.budget.as_millis() as u64, "FROM graphs still loading");
        }
    }

    /// Full request path without HTTP: validation, FROM loading, memo, engine.
    /// Returns the serialized body, whether it came from the memo, the
    /// milliseconds the engine took when the body was computed, and the
    /// generation used.
    pub async fn handle(self: &Arc<Self>, req: &SuggestRequest) -> Result<(Bytes, bool, f64, u64), RequestError> {
        req.validate(&self.defaults.limits)?;
        let ctx = req.context();
        self.ensure_from_graphs(&ctx).await;
        let kb = self.snapshot();
        let opts = req.options(&self.defaults);
        let key = MemoKey {
            prefix: prefix_digest(req),
            langs: opts.langs.langs().to_vec(),
            limit: opts.limit,
            registry: opts.registry_enabled,
            generation: kb.generation(),
        };
        if let Some(hit) = self.memo.lock().expect("memo lock poisoned").get(&key).cloned() {
            return Ok((hit.body.clone(), true, hit.timing_ms, hit.generation));
        }
        let started = Instant::now();
        let response = respond_with_context(req, &ctx, &kb, self.registry(), &self.defaults);
        let body = Bytes::from(serde_json::to_vec(&response).expect("response serializes"));
        let timing_ms = started.elapsed().as_secs_f64() * 1000.0;
        let memo = Arc::new(Memo {
            body: body.clone(),
            timing_ms,
            generation: response.generation,
        });
        self.memo.lock().expect("memo lock poisoned").put(key, memo);
        Ok((body, false, timing_ms, response.generation))
    }

    /// Same as [`AppState::handle`] but deserialized, for in-process callers.
    pub async fn suggest(self: &Arc<Self>, req: &SuggestRequest) -> Result<SuggestResponse, RequestError> {
        let (body, ..) = self.handle(req).await?;
        Ok(serde_json::from_slice(&body).expect("own body parses"))
    }

    /// Loads one graph on request, waiting up to the budget.
    pub async fn load_graph(self: &Arc<Self>, iri: Iri) -> GraphResponse {
        let current = self.snapshot().loaded_graphs.get(&iri).cloned();
        let status = match current {
            Some(LoadStatus::Loaded) => LoadStatus::Loaded,
            Some(LoadStatus::Failed(reason)) if !self.loader.retry_allowed(iri.as_str()) => LoadStatus::Failed(reason),
            _ => {
                let load = self.start_load(iri.clone());
                tokio::time::timeout(self.budget, load).await.unwrap_or(LoadStatus::Pending)
            }
        };
        let kb = self.snapshot();
        GraphResponse {
            iri: iri.as_str().to_string(),
            status: status_name(&status).to_string(),
            reason: match status {
                LoadStatus::Failed(reason) => Some(reason),
                _ => None,
            },
            terms: kb.index.terms().count(),
            generation: kb.generation(),
        }
    }
}

fn error_response(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    let body = ErrorBody {
        error: code.to_string(),
        message: message.into(),
    };
    (status, Json(body)).into_response()
}

fn request_error(err: &RequestError) -> Response {
    let status = match err {
        RequestError::QueryTooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
        _ => StatusCode::BAD_REQUEST,
    };
    (status, Json(err.body())).into_response()
}

async fn read_json<T: serde::de::DeserializeOwned>(body: Body, limit: usize) -> Result<T, Response> {
    let bytes = to_bytes(body, limit).await.map_err(|_| {
        error_response(
            StatusCode::PAYLOAD_TOO_LARGE,
            "payload_too_large",
            format!("request body exceeds {limit} bytes"),
        )
    })?;
    serde_json::from_slice(&bytes).map_err(|e| error_response(StatusCode::BAD_REQUEST, "malformed_json", e.to_string()))
}

async fn suggest_handler(State(state): State<Arc<AppState>>, body: Body) -> Response {
    if !state.is_ready() {
        return error_response(StatusCode::SERVICE_UNAVAILABLE, "not_ready", "initial load in progress");
    }
    let limit = state.defaults.limits.max_query_bytes + ENVELOPE_BYTES;
    let req: SuggestRequest = match read_json(body, limit).await {
        Ok(req) => req,
        Err(resp) => return resp,
    };
    match state.handle(&req).await {
        Ok((body, hit, timing_ms, generation)) => {
            let mut resp = Response::new(Body::from(body));
            let headers = resp.headers_mut();
            headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
            headers.insert(HEADER_CACHE, HeaderValue::from_static(if hit { "hit" } else { "miss" }));
            if let Ok(v) = HeaderValue::from_str(&format!("{timing_ms:.3}")) {
                headers.insert(HEADER_TIMING, v);
            }
            headers.insert(HEADER_GENERATION, HeaderValue::from(generation));
            resp
        }
        Err(err) => request_error(&err),
    }
}

async fn graphs_handler(
    State(state): State<Arc<AppState>>,
    ConnectInfo(peer): ConnectInfo<SocketAddr>,
    body: Body,
) -> Response {
    if !peer.ip().is_loopback() && !state.allow_remote_admin {
        return error_response(StatusCode::FORBIDDEN, "forbidden", "graph loading is restricted to loopback clients");
    }
    let req: GraphRequest = match read_json(body, ENVELOPE_BYTES).await {
        Ok(req) => req,
        Err(resp) => return resp,
    };
    let iri = match Iri::new(req.iri.clone()) {
        Ok(iri) if iri.as_str().contains(':') => iri,
        _ => return error_response(StatusCode::BAD_REQUEST, "invalid_iri", format!("'{}' is not an absolute IRI", req.iri)),
    };
    let resp = state.load_graph(iri).await;
    let mut out = Json(&resp).into_response();
    out.headers_mut().insert(HEADER_GENERATION, HeaderValue::from(resp.generation));
    out
}

async fn health_handler() -> Response {
    Json(serde_json::json!({ "status": "ok" })).into_response()
}

async fn ready_handler(State(state): State<Arc<AppState>>) -> Response {
    let readiness = state.readiness();
    let status = if readiness.ready { StatusCode::OK } else { StatusCode::SERVICE_UNAVAILABLE };
    (status, Json(readiness)).into_response()
}

async fn version_handler() -> Response {
    Json(serde_json::json!({
        "name": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
    }))
    .into_response()
}

/// One log line per request: method, path, status, milliseconds, generation.
async fn access_log(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    let started = Instant::now();
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let resp = next.run(req).await;
    let generation = resp
        .headers()
        .get(HEADER_GENERATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| state.snapshot().generation());
    tracing::info!(
        target: "access",
        "{method} {path} {} {:.1}ms gen={generation}",
        resp.status().as_u16(),
        started.elapsed().as_secs_f64() * 1000.0
    );
    resp
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/suggest", post(suggest_handler))
        .route("/graphs", post(graphs_handler))
        .route("/health", get(health_handler))
        .route("/ready", get(ready_handler))
        .route("/version", get(version_handler))
        .layer(middleware::from_fn_with_state(state.clone(), access_log))
        .with_state(state)
}

/// Serves until the future `shutdown` completes.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state).into_make_service_with_connect_info::<SocketAddr>())
        .with_graceful_shutdown(shutdown)
        .await
}
