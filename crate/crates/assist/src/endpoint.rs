//! Term harvesting from a SPARQL endpoint.

use std::collections::{BTreeMap, HashMap};

use serde::Deserialize;
use sparql_assist_core::kb::{declared_kind, is_vocabulary};
use sparql_assist_core::{Iri, LangPref, Term, TermKind};

use crate::loader::Loader;

pub const RESULTS_ACCEPT: &str = "application/sparql-results+json";
pub const DEFAULT_ROW_CAP: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointSource {
    pub url: String,
    pub default_graph: Option<Iri>,
    pub page_size: usize,
}

impl EndpointSource {
    pub fn new(url: impl Into<String>) -> Self {
        EndpointSource {
            url: url.into(),
            default_graph: None,
            page_size: 1000,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EndpointOutcome {
    pub terms: Vec<Term>,
    pub requests: usize,
    /// Set when harvesting stopped early; terms gathered so far are kept.
    pub error: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ResultsDoc {
    results: Bindings,
}

#[derive(Debug, Deserialize)]
struct Bindings {
    bindings: Vec<HashMap<String, Value>>,
}

#[derive(Debug, Deserialize)]
struct Value {
    #[serde(rename = "type")]
    kind: String,
    value: String,
    #[serde(rename = "xml:lang")]
    lang: Option<String>,
}

impl Value {
    fn iri(&self) -> Option<Iri> {
        (self.kind == "uri").then(|| Iri::new(self.value.clone()).ok()).flatten()
    }
}

type Row = HashMap<String, Value>;

fn lang_filter(langs: &LangPref) -> String {
    if langs.is_empty() {
        return String::new();
    }
    let mut tags: Vec<String> = langs.langs().iter().map(|l| format!("\"{l}\"")).collect();
    tags.push("\"\"".to_string());
    format!(" FILTER(lang(?label) IN ({}))", tags.join(", "))
}

pub fn label_query(langs: &LangPref, limit: usize, offset: usize) -> String {
    format!(
        "SELECT ?s ?label ?type WHERE {{ ?s <http://www.w3.org/2000/01/rdf-schema#label> ?label . \
         OPTIONAL {{ ?s a ?type }}{} }} ORDER BY ?s LIMIT {limit} OFFSET {offset}",
        lang_filter(langs)
    )
}

pub fn predicate_query(limit: usize) -> String {
    format!("SELECT DISTINCT ?p WHERE {{ ?s ?p ?o }} LIMIT {limit}")
}

fn request_url(source: &EndpointSource, query: &str) -> Result<String, String> {
    let mut url = url::Url::parse(&source.url).map_err(|e| format!("bad endpoint URL: {e}"))?;
    {
        let mut pairs = url.query_pairs_mut();
        pairs.append_pair("query", query);
        if let Some(graph) = &source.default_graph {
            pairs.append_pair("default-graph-uri", graph.as_str());
        }
    }
    Ok(url.into())
}

fn run(loader: &Loader, source: &EndpointSource, query: &str, requests: &mut usize) -> Result<Vec<Row>, String> {
    let url = request_url(source, query)?;
    *requests += 1;
    let response = loader.fetch(&url, RESULTS_ACCEPT).map_err(|e| e.to_string())?;
    let doc: ResultsDoc =
        serde_json::from_slice(&response.body).map_err(|e| format!("malformed results: {e}"))?;
    Ok(doc.results.bindings)
}

#[derive(Default)]
struct Collected {
    terms: BTreeMap<Iri, Term>,
}

impl Collected {
    fn entry(&mut self, iri: &Iri, kind: TermKind, source: Option<&Iri>) -> &mut Term {
        self.terms.entry(iri.clone()).or_insert_with(|| {
            let term = Term::new(iri.clone(), kind);
            match source {
                Some(s) => term.with_source(s.clone()),
                None => term,
            }
        })
    }

    fn add_row(&mut self, row: &Row, source: Option<&Iri>) {
        let Some(subject) = row.get("s").and_then(Value::iri) else {
            return;
        };
        let ty = row.get("type").and_then(Value::iri);
        let kind = ty
            .as_ref()
            .and_then(|t| declared_kind(t.as_str()))
            .unwrap_or(TermKind::Individual);
        let mut term = Term::new(subject.clone(), kind);
        if let Some(label) = row.get("label").filter(|v| v.kind == "literal") {
            term.add_label(label.lang.as_deref().unwrap_or(""), label.value.clone());
        }
        self.entry(&subject, kind, source).merge(&term);
        if let Some(class) = ty.filter(|t| !is_vocabulary(t)) {
            self.entry(&class, TermKind::OntClass, source);
        }
    }
}

/// Pages through the endpoint's labelled resources and distinct predicates.
/// Stops at `row_cap` rows. Each label page asks for one extra row so the
/// last page is detected without an empty request.
pub fn preload_endpoint(source: &EndpointSource, langs: &LangPref, loader: &Loader, row_cap: usize) -> EndpointOutcome {
    let mut outcome = EndpointOutcome::default();
    let origin = Iri::new(source.url.clone()).ok();
    let mut collected = Collected::default();
    let page = source.page_size.max(1);
    let mut offset = 0;
    let mut rows_seen = 0;
    loop {
        let want = page.min(row_cap - rows_seen);
        if want == 0 {
            break;
        }
        let rows = match run(loader, source, &label_query(langs, want + 1, offset), &mut outcome.requests) {
            Ok(rows) => rows,
            Err(e) => {
                outcome.error = Some(e);
                break;
            }
        };
        let more = rows.len() > want;
        for row in rows.iter().take(want) {
            collected.add_row(row, origin.as_ref());
        }
        rows_seen += rows.len().min(want);
        offset += want;
        if !more {
            break;
        }
    }
    if outcome.error.is_none() {
        match run(loader, source, &predicate_query(row_cap), &mut outcome.requests) {
            Ok(rows) => {
                for p in rows.iter().filter_map(|r| r.get("p").and_then(Value::iri)) {
                    let kind = TermKind::Property;
                    let term = Term::new(p.clone(), kind);
                    collected.entry(&p, kind, origin.as_ref()).merge(&term);
                }
            }
            Err(e) => outcome.error = Some(e),
        }
    }
    outcome.terms = collected.terms.into_values().collect();
    outcome
}
