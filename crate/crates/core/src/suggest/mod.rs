//! Ranking engine, syntax suggestions, registry filtering and the splice
//! applied when a suggestion is accepted.

mod registry;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use registry::{accepted_services, registry_filter, Registry, RegistryError, RegistryService};

use crate::chars::{is_iri_char, is_simple_local};
use crate::index::{normalize_label, Field, Hit, KindSet, LangPref, Term, TermKind};
use crate::kb::KnowledgeBase;
use crate::rdf::{vocab, Iri};
use crate::sparql::{connected_individuals, expand_prefixed_name, ClausePosition, PatternNode, QueryContext};

/// Sort key of a suggestion; lower sorts first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScoreTuple {
    pub context_boost: u32,
    pub lang_tier: u32,
    pub match_tier: u32,
    pub normalized_label: String,
    pub iri: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Loaded ontology or data graph, when its origin is known.
    Ontology(Option<Iri>),
    /// Service whose registry entry attaches the property.
    Registry(Iri),
    Syntax,
    QueryLocal,
}

impl Provenance {
    pub fn kind_str(&self) -> &'static str {
        match self {
            Provenance::Ontology(_) => "ONTOLOGY",
            Provenance::Registry(_) => "REGISTRY",
            Provenance::Syntax => "SYNTAX",
            Provenance::QueryLocal => "QUERY_LOCAL",
        }
    }

    pub fn source(&self) -> Option<&Iri> {
        match self {
            Provenance::Ontology(src) => src.as_ref(),
            Provenance::Registry(service) => Some(service),
            Provenance::Syntax | Provenance::QueryLocal => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.source() {
            Some(src) => write!(f, "{}({src})", self.kind_str()),
            None => f.write_str(self.kind_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suggestion {
    pub insert_text: String,
    pub display_label: String,
    pub description: Option<String>,
    pub iri: Option<Iri>,
    pub kind: TermKind,
    pub lang: String,
    pub score: ScoreTuple,
    pub provenance: Provenance,
}

impl Suggestion {
    fn dedup_key(&self) -> &str {
        self.iri.as_ref().map_or(self.insert_text.as_str(), Iri::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuggestOptions {
    pub langs: LangPref,
    pub limit: usize,
    pub include_syntax: bool,
    pub registry_enabled: bool,
    pub connectivity_depth: usize,
}

impl Default for SuggestOptions {
    fn default() -> Self {
        SuggestOptions {
            langs: LangPref::default(),
            limit: 20,
            include_syntax: true,
            registry_enabled: false,
            connectivity_depth: 2,
        }
    }
}

const BOOST_FOCUS: u32 = 0;
const BOOST_CLASS: u32 = 1;
const BOOST_NONE: u32 = 2;
const BOOST_SYNTAX: u32 = 3;

/// Grammar-legal keywords at the cursor that start with the partial token
/// (case-insensitively), alphabetically.
pub fn suggest_syntax(ctx: &QueryContext) -> Vec<Suggestion> {
    let boost = match ctx.position {
        ClausePosition::Subject | ClausePosition::Predicate | ClausePosition::Object => BOOST_SYNTAX,
        _ => 0,
    };
    let partial = ctx.partial_token.as_str();
    let mut out: Vec<Suggestion> = ctx
        .keywords
        .iter()
        .filter(|kw| {
            kw.len() >= partial.len()
                && kw.is_char_boundary(partial.len())
                && kw[..partial.len()].eq_ignore_ascii_case(partial)
        })
        .map(|kw| keyword_suggestion(kw, boost))
        .collect();
    out.sort_by(|a, b| a.score.cmp(&b.score));
    out
}

fn keyword_suggestion(kw: &str, boost: u32) -> Suggestion {
    Suggestion {
        insert_text: kw.to_string(),
        display_label: kw.to_string(),
        description: None,
        iri: None,
        kind: TermKind::Keyword,
        lang: String::new(),
        score: ScoreTuple {
            context_boost: boost,
            lang_tier: 0,
            match_tier: 0,
            normalized_label: kw.to_ascii_lowercase(),
            iri: String::new(),
        },
        provenance: Provenance::Syntax,
    }
}

/// How the partial token selects terms.
#[derive(Debug, Clone)]
enum Matcher {
    /// Normalized label prefix (empty matches everything).
    Label(String),
    /// IRI prefix from a `prefix:local` or `<...` partial.
    IriPrefix(String),
    /// Variable partial (`?x`): no terms match.
    Variable,
    /// PNAME with an undeclared prefix.
    Nothing,
}

fn matcher_for(ctx: &QueryContext) -> Matcher {
    let partial = ctx.partial_token.as_str();
    if partial.is_empty() {
        return Matcher::Label(String::new());
    }
    if partial.starts_with(['?', '$']) {
        return Matcher::Variable;
    }
    if let Some(body) = partial.strip_prefix('<') {
        let body = body.strip_suffix('>').unwrap_or(body);
        return match crate::sparql::unescape_iri_prefix(body) {
            Some(prefix) => Matcher::IriPrefix(prefix),
            None => Matcher::Nothing,
        };
    }
    if partial.contains(':') {
        return match expand_prefixed_name(ctx, partial) {
            Ok(iri) => Matcher::IriPrefix(iri.into_string()),
            Err(_) => match partial.split_once(':') {
                // `ns:` alone expands to the namespace, which Iri::new may
                // reject only if the namespace itself is odd
                Some((prefix, local)) if local.is_empty() => match ctx.prefixes.get(prefix) {
                    Some(ns) => Matcher::IriPrefix(ns.as_str().to_string()),
                    None => Matcher::Nothing,
                },
                _ => Matcher::Nothing,
            },
        };
    }
    Matcher::Label(normalize_label(partial))
}

/// Scored view of one term under the current matcher.
struct Scored {
    lang_tier: u32,
    match_tier: u32,
    normalized_label: String,
    display_label: String,
    lang: String,
}

fn scored_from_hit(hit: &Hit<'_>, langs: &LangPref) -> Scored {
    let entry = hit.entry;
    let (display_label, lang) = if entry.field == Field::Label {
        (entry.matched_text.clone(), entry.lang.clone())
    } else {
        let (text, lang) = entry.term.display_label(langs);
        (text.to_string(), lang.to_string())
    };
    Scored {
        lang_tier: hit.lang_tier(),
        match_tier: hit.match_tier(),
        normalized_label: entry.normalized_key.clone(),
        display_label,
        lang,
    }
}

/// Local-name-only scoring for IRIs absent from the index.
fn scored_from_local(iri: &Iri, key: &str, langs: &LangPref) -> Option<Scored> {
    let local = iri.local_name();
    let normalized = normalize_label(local);
    if !normalized.starts_with(key) {
        return None;
    }
    let tier = langs.tier("", Field::Localname);
    Some(Scored {
        lang_tier: tier / 2,
        match_tier: 3,
        normalized_label: normalized,
        display_label: local.to_string(),
        lang: String::new(),
    })
}

/// Scores one IRI under the matcher; `None` if it does not match.
fn score_iri(kb: &KnowledgeBase, iri: &Iri, matcher: &Matcher, langs: &LangPref) -> Option<Scored> {
    let key = match matcher {
        Matcher::Label(key) => key.as_str(),
        Matcher::IriPrefix(prefix) if iri.as_str().starts_with(prefix.as_str()) => "",
        _ => return None,
    };
    match kb.index.best_match(iri.as_str(), key, langs) {
        Some(hit) => Some(scored_from_hit(&hit, langs)),
        None if kb.index.term(iri.as_str()).is_none() => scored_from_local(iri, key, langs),
        None => None,
    }
}

struct Builder<'a> {
    ctx: &'a QueryContext,
    kb: &'a KnowledgeBase,
    opts: &'a SuggestOptions,
    matcher: Matcher,
    out: Vec<Suggestion>,
}

impl Builder<'_> {
    fn push_term(&mut self, iri: &Iri, kind: TermKind, boost: u32, scored: Scored, provenance: Option<Provenance>) {
        let term = self.kb.index.term(iri.as_str());
        let description = term
            .and_then(|t| t.display_description(&self.opts.langs))
            .map(|(text, _)| text.to_string());
        let provenance = provenance.unwrap_or_else(|| Provenance::Ontology(term.and_then(|t| t.source.clone())));
        self.out.push(Suggestion {
            insert_text: insert_text_for(self.ctx, iri),
            display_label: scored.display_label,
            description,
            iri: Some(iri.clone()),
            kind,
            lang: scored.lang,
            score: ScoreTuple {
                context_boost: boost,
                lang_tier: scored.lang_tier,
                match_tier: scored.match_tier,
                normalized_label: scored.normalized_label,
                iri: iri.as_str().to_string(),
            },
            provenance,
        });
    }

    /// Best `limit` terms of the given kinds, skipping IRIs in `exclude`.
    fn search(&mut self, kinds: KindSet, boost: u32, exclude: &BTreeSet<Iri>, mut keep: impl FnMut(&Term) -> bool) {
        let limit = self.opts.limit;
        let langs = &self.opts.langs;
        let mut found: Vec<(Iri, TermKind, Scored)> = Vec::new();
        match &self.matcher {
            Matcher::Label(key) => {
                let hits = self
                    .kb
                    .index
                    .search_key(key, langs, kinds, limit, |t| !exclude.contains(&t.iri) && keep(t));
                for hit in hits {
                    let term = &hit.entry.term;
                    let kind = term.kinds.iter().find(|k| kinds.contains(*k)).unwrap_or(term.kind());
                    found.push((term.iri.clone(), kind, scored_from_hit(&hit, langs)));
                }
            }
            Matcher::IriPrefix(prefix) => {
                for term in self.kb.index.iris_with_prefix(prefix) {
                    if !term.kinds.intersects(kinds) || exclude.contains(&term.iri) || !keep(term) {
                        continue;
                    }
                    let Some(hit) = self.kb.index.best_match(term.iri.as_str(), "", langs) else {
                        continue;
                    };
                    let kind = term.kinds.iter().find(|k| kinds.contains(*k)).unwrap_or(term.kind());
                    found.push((term.iri.clone(), kind, scored_from_hit(&hit, langs)));
                }
            }
            Matcher::Variable | Matcher::Nothing => {}
        }
        for (iri, kind, scored) in found {
            self.push_term(&iri, kind, boost, scored, None);
        }
    }

    fn variables(&mut self) {
        let partial = self.ctx.partial_token.as_str();
        let (sigil, name_prefix) = match partial.chars().next() {
            None => ('?', ""),
            Some(c @ ('?' | '$')) => (c, &partial[1..]),
            Some(_) => return,
        };
        for name in &self.ctx.variables {
            if !name.starts_with(name_prefix) {
                continue;
            }
            let text = format!("{sigil}{name}");
            self.out.push(Suggestion {
                insert_text: text.clone(),
                display_label: text,
                description: None,
                iri: None,
                kind: TermKind::Individual,
                lang: String::new(),
                score: ScoreTuple {
                    context_boost: BOOST_FOCUS,
                    lang_tier: 0,
                    match_tier: 0,
                    normalized_label: name.clone(),
                    iri: String::new(),
                },
                provenance: Provenance::QueryLocal,
            });
        }
    }

    fn subject_or_object(&mut self) {
        self.variables();
        let none = BTreeSet::new();
        let type_object = self.ctx.position == ClausePosition::Object
            && self
                .ctx
                .focus_predicate
                .as_ref()
                .and_then(PatternNode::as_iri)
                .is_some_and(|p| p.as_str() == vocab::RDF_TYPE);
        match self.ctx.position {
            ClausePosition::Subject => {
                self.search(KindSet::of(&[TermKind::Individual, TermKind::OntClass]), BOOST_NONE, &none, |_| true);
            }
            _ if type_object => {
                self.search(KindSet::of(&[TermKind::OntClass]), BOOST_CLASS, &none, |_| true);
                self.search(KindSet::of(&[TermKind::Individual]), BOOST_NONE, &none, |t| {
                    !t.has_kind(TermKind::OntClass)
                });
            }
            _ => {
                self.search(KindSet::of(&[TermKind::Individual]), BOOST_NONE, &none, |_| true);
            }
        }
    }

    fn predicate(&mut self, registry: Option<&Registry>) {
        let focus = focus_profile(self.ctx, self.kb, self.opts.connectivity_depth);
        let mut boosts: BTreeMap<Iri, u32> = BTreeMap::new();
        for p in &focus.class_properties {
            boosts.insert(p.clone(), BOOST_CLASS);
        }
        for p in &focus.individual_properties {
            boosts.insert(p.clone(), BOOST_FOCUS);
        }
        let from_registry = match registry {
            Some(reg) if self.opts.registry_enabled => {
                registry::registry_properties(reg, &focus.types, self.kb)
            }
            _ => BTreeMap::new(),
        };
        let special: BTreeSet<Iri> = boosts.keys().chain(from_registry.keys()).cloned().collect();
        for iri in &special {
            let Some(scored) = score_iri(self.kb, iri, &self.matcher, &self.opts.langs) else {
                continue;
            };
            let boost = boosts.get(iri).copied().unwrap_or(BOOST_NONE);
            let provenance = from_registry.get(iri).map(|service| Provenance::Registry(service.clone()));
            self.push_term(iri, TermKind::Property, boost, scored, provenance);
        }
        self.search(KindSet::of(&[TermKind::Property]), BOOST_NONE, &special, |_| true);

        if self.opts.include_syntax && self.ctx.keywords.contains(&"a") && matches!(self.ctx.partial_token.as_str(), "" | "a") {
            let mut a = keyword_suggestion("a", BOOST_NONE);
            a.score.match_tier = 0;
            self.out.push(a);
        }
    }
}

/// Properties and types known for the clause's subject.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct FocusProfile {
    /// Individuals whose properties get the top boost.
    pub individuals: BTreeSet<Iri>,
    pub individual_properties: BTreeSet<Iri>,
    pub types: BTreeSet<Iri>,
    pub class_properties: BTreeSet<Iri>,
}

/// Focus individuals are the focus subject itself when it is an IRI, or the
/// individuals connected to it when it is a variable.
pub fn focus_profile(ctx: &QueryContext, kb: &KnowledgeBase, depth: usize) -> FocusProfile {
    let mut profile = FocusProfile::default();
    let Some(subject) = &ctx.focus_subject else {
        return profile;
    };
    match subject {
        PatternNode::Iri(iri) => {
            profile.individuals.insert(iri.clone());
            if let Some(types) = kb.types_of.get(iri) {
                profile.types.extend(types.iter().cloned());
            }
        }
        PatternNode::Var(v) => {
            for (iri, _) in connected_individuals(ctx, v, depth) {
                profile.individuals.insert(iri);
            }
        }
        _ => {}
    }
    for pattern in &ctx.patterns {
        let is_type = pattern.predicate.as_iri().is_some_and(|p| p.as_str() == vocab::RDF_TYPE);
        if is_type && &pattern.subject == subject {
            if let PatternNode::Iri(class) = &pattern.object {
                profile.types.insert(class.clone());
            }
        }
    }
    for i in &profile.individuals {
        if let Some(props) = kb.individual_properties.get(i) {
            profile.individual_properties.extend(props.iter().cloned());
        }
    }
    for t in &profile.types {
        if let Some(props) = kb.class_properties.get(t) {
            profile.class_properties.extend(props.iter().cloned());
        }
    }
    profile
}

/// Ranked completions for the cursor described by `ctx`.
pub fn suggest(
    ctx: &QueryContext,
    kb: &KnowledgeBase,
    registry: Option<&Registry>,
    opts: &SuggestOptions,
) -> Vec<Suggestion> {
    let mut builder = Builder {
        ctx,
        kb,
        opts,
        matcher: matcher_for(ctx),
        out: Vec::new(),
    };
    match ctx.position {
        ClausePosition::Subject | ClausePosition::Object => builder.subject_or_object(),
        ClausePosition::Predicate => builder.predicate(registry),
        _ => {}
    }
    if opts.include_syntax && ctx.position != ClausePosition::Predicate {
        builder.out.extend(suggest_syntax(ctx));
    }
    let mut out = builder.out;
    out.sort_by(|a, b| a.score.cmp(&b.score));
    let mut seen: BTreeSet<String> = BTreeSet::new();
    out.retain(|s| seen.insert(s.dedup_key().to_string()));
    out.truncate(opts.limit);
    out
}

/// `prefix:local` when a declared namespace covers the IRI and the rest is a
/// valid local name, otherwise `<IRI>` with characters that are not allowed
/// in IRI references escaped.
pub fn insert_text_for(ctx: &QueryContext, iri: &Iri) -> String {
    let s = iri.as_str();
    let best = ctx
        .prefixes
        .iter()
        .filter(|(_, ns)| s.starts_with(ns.as_str()) && is_simple_local(&s[ns.as_str().len()..]))
        .max_by(|(pa, na), (pb, nb)| na.as_str().len().cmp(&nb.as_str().len()).then(pb.cmp(pa)));
    if let Some((prefix, ns)) = best {
        return format!("{prefix}:{}", &s[ns.as_str().len()..]);
    }
    let mut out = String::with_capacity(s.len() + 2);
    out.push('<');
    for c in s.chars() {
        if is_iri_char(c) {
            out.push(c);
        } else if (c as u32) <= 0xFFFF {
            out.push_str(&format!("\\u{:04X}", c as u32));
        } else {
            out.push_str(&format!("\\U{:08X}", c as u32));
        }
    }
    out.push('>');
    out
}

/// Replaces the partial token (or inserts at the cursor) with the
/// suggestion's text plus one space. Returns the new text and cursor.
pub fn apply_suggestion(text: &str, ctx: &QueryContext, s: &Suggestion) -> (String, usize) {
    let end = ctx.cursor.min(text.len());
    let start = ctx.partial_start();
    let mut out = String::with_capacity(text.len() + s.insert_text.len() + 1);
    out.push_str(&text[..start]);
    out.push_str(&s.insert_text);
    out.push(' ');
    let cursor = out.len();
    out.push_str(&text[end..]);
    (out, cursor)
}
