//! Reference implementations used as test oracles, plus random generators.
//! Everything here is deliberately naive: linear scans and fixed points.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;
use sparql_assist_core::index::Field;
use sparql_assist_core::{normalize_label, Iri, KindSet, LangPref, Term, TermKind};

/// Independent normalization: NFKD, drop combining marks, full case fold,
/// repeated until stable, then whitespace collapsed.
pub fn normalize_oracle(s: &str) -> String {
    use unicode_normalization::char::is_combining_mark;
    use unicode_normalization::UnicodeNormalization;
    let step = |s: &str| -> String {
        let stripped: String = s.nfkd().filter(|c| !is_combining_mark(*c)).collect();
        caseless::default_case_fold_str(&stripped)
    };
    let mut cur = step(s);
    loop {
        let next = step(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleHit {
    pub tier: u32,
    pub key: String,
    pub iri: String,
    pub matched_text: String,
    pub lang: String,
    pub field: Field,
}

fn oracle_kinds(kinds: &[TermKind]) -> BTreeSet<TermKind> {
    let mut set: BTreeSet<TermKind> = kinds.iter().copied().filter(|k| *k != TermKind::Keyword).collect();
    if set.contains(&TermKind::OntClass) || set.contains(&TermKind::Property) {
        set.remove(&TermKind::Individual);
    }
    if set.is_empty() {
        set.insert(TermKind::Individual);
    }
    set
}

/// Linear scan over every (term, text) pair.
pub fn linear_scan(terms: &[Term], prefix: &str, langs: &[&str], kinds: &[TermKind], limit: usize) -> Vec<OracleHit> {
    // merge by IRI
    let mut merged: BTreeMap<String, (Vec<TermKind>, Vec<(String, String, Field)>)> = BTreeMap::new();
    for t in terms {
        let e = merged.entry(t.iri.as_str().to_string()).or_default();
        e.0.extend(t.kinds.iter());
        for (lang, texts) in &t.labels {
            for text in texts {
                e.1.push((lang.clone(), text.clone(), Field::Label));
            }
        }
        for (lang, texts) in &t.descriptions {
            for text in texts {
                e.1.push((lang.clone(), text.clone(), Field::Description));
            }
        }
    }
    let n = langs.len() as u32;
    let rank = |lang: &str| -> u32 {
        if lang.is_empty() {
            n
        } else {
            langs.iter().position(|l| *l == lang).map_or(n + 1, |p| p as u32)
        }
    };
    let key = normalize_label(prefix);
    let mut hits = Vec::new();
    for (iri, (term_kinds, texts)) in &merged {
        let tk = oracle_kinds(term_kinds);
        if !kinds.iter().any(|k| tk.contains(k)) {
            continue;
        }
        let mut all = texts.clone();
        let local = &iri[iri.rfind(['#', '/']).map_or(0, |i| i + 1)..];
        if !local.is_empty() {
            all.push((String::new(), local.to_string(), Field::Localname));
        }
        all.sort();
        all.dedup();
        for (lang, text, field) in all {
            let k = normalize_label(&text);
            if !k.starts_with(&key) {
                continue;
            }
            let tier = match field {
                Field::Label => 2 * rank(&lang),
                Field::Description => 2 * rank(&lang) + 1,
                Field::Localname => 2 * n + 4,
            };
            hits.push(OracleHit {
                tier,
                key: k,
                iri: iri.clone(),
                matched_text: text,
                lang,
                field,
            });
        }
    }
    hits.sort_by(|a, b| {
        (a.tier, &a.key, &a.iri, &a.matched_text, &a.lang, a.field).cmp(&(
            b.tier,
            &b.key,
            &b.iri,
            &b.matched_text,
            &b.lang,
            b.field,
        ))
    });
    let mut seen = BTreeSet::new();
    hits.retain(|h| seen.insert(h.iri.clone()));
    hits.truncate(limit);
    hits
}

/// Reflexive-transitive closure by fixed-point iteration over edge pairs.
pub fn closure_oracle(edges: &[(String, String)], start: &str) -> BTreeSet<String> {
    let mut reach: BTreeSet<String> = [start.to_string()].into();
    loop {
        let before = reach.len();
        for (a, b) in edges {
            if reach.contains(a) {
                reach.insert(b.clone());
            }
        }
        if reach.len() == before {
            return reach;
        }
    }
}

pub const LANGS: [&str; 3] = ["en", "de", "fr"];
const SYLLABLES: [&str; 16] = [
    "ka", "ti", "tel", "gen", "pro", "Über", "Größe", "café", "has", "part", "of", "ΣΊΣ", "名", "ré", "on", "x",
];

pub fn word(rng: &mut StdRng) -> String {
    let n = rng.random_range(1..=3);
    let mut s = String::new();
    for i in 0..n {
        if i > 0 && rng.random_bool(0.3) {
            s.push(' ');
        }
        s.push_str(SYLLABLES.choose(rng).unwrap());
    }
    s
}

/// Deterministic in `id`, so a repeated id yields the same IRI.
pub fn term_iri(id: usize) -> Iri {
    use rand::SeedableRng;
    let mut rng = StdRng::seed_from_u64(id as u64);
    if rng.random_bool(0.4) {
        Iri::new(format!("http://semanticscience.org/resource/SIO_{id:06}")).unwrap()
    } else {
        Iri::new(format!("http://example.org/onto#{}{id}", word(&mut rng).replace(' ', "_"))).unwrap()
    }
}

pub fn random_kind(rng: &mut StdRng) -> TermKind {
    *[TermKind::OntClass, TermKind::Property, TermKind::Individual].choose(rng).unwrap()
}

/// Synthetic terms with labels in three languages, untagged labels,
/// descriptions and opaque local names. Some IRIs repeat to exercise merging.
pub fn synthetic_terms(count: usize, rng: &mut StdRng) -> Vec<Term> {
    let mut terms = Vec::with_capacity(count);
    for i in 0..count {
        let id = if i > 0 && rng.random_bool(0.05) { rng.random_range(0..i) } else { i };
        let mut t = Term::new(term_iri(id), random_kind(rng));
        for _ in 0..rng.random_range(0..=3) {
            let lang = if rng.random_bool(0.2) { "" } else { LANGS.choose(rng).unwrap() };
            t.add_label(lang, word(rng));
        }
        if rng.random_bool(0.3) {
            let lang = if rng.random_bool(0.3) { "" } else { LANGS.choose(rng).unwrap() };
            t.add_description(lang, format!("{} {}", word(rng), word(rng)));
        }
        terms.push(t);
    }
    terms
}

pub fn random_prefix(rng: &mut StdRng) -> String {
    match rng.random_range(0..6) {
        0 => String::new(),
        1 => format!("SIO_0{}", rng.random_range(0..10)),
        _ => {
            let w = word(rng);
            let chars: Vec<char> = w.chars().collect();
            let n = rng.random_range(1..=chars.len());
            let s: String = chars[..n].iter().collect();
            if rng.random_bool(0.3) {
                s.to_uppercase()
            } else {
                s
            }
        }
    }
}

pub fn random_langs(rng: &mut StdRng) -> Vec<&'static str> {
    let mut langs = LANGS.to_vec();
    use rand::seq::SliceRandom;
    langs.shuffle(rng);
    langs.truncate(rng.random_range(0..=3));
    langs
}

pub fn random_kinds(rng: &mut StdRng) -> Vec<TermKind> {
    let all = [TermKind::OntClass, TermKind::Property, TermKind::Individual];
    let picked: Vec<TermKind> = all.iter().copied().filter(|_| rng.random_bool(0.6)).collect();
    if picked.is_empty() {
        vec![random_kind(rng)]
    } else {
        picked
    }
}

pub fn kindset(kinds: &[TermKind]) -> KindSet {
    KindSet::of(kinds)
}

pub fn langpref(langs: &[&str]) -> LangPref {
    LangPref::new(langs.iter().copied())
}

/// Path of a file in the shared fixtures directory.
pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// One hand-derived expectation for `derive_context`. A missing cursor means
/// the end of the text.
#[derive(Debug, Clone, serde::Deserialize)]
pub struct CorpusEntry {
    pub text: String,
    pub cursor: Option<usize>,
    pub position: String,
    pub variables: Vec<String>,
    pub partial_token: String,
    pub focus_subject: Option<String>,
    pub prefixes: BTreeMap<String, String>,
    pub from_graphs: Vec<String>,
    pub from_named: Vec<String>,
    #[serde(default)]
    pub note: String,
}

impl CorpusEntry {
    pub fn cursor(&self) -> usize {
        self.cursor.unwrap_or(self.text.len())
    }
}

pub fn context_corpus() -> Vec<CorpusEntry> {
    let text = std::fs::read_to_string(fixture("context_corpus.json")).expect("corpus readable");
    serde_json::from_str(&text).expect("corpus parses")
}

/// Field-by-field differences between the derived context and the entry.
pub fn corpus_mismatches(entry: &CorpusEntry) -> Vec<String> {
    let ctx = sparql_assist_core::derive_context(&entry.text, entry.cursor());
    let mut out = Vec::new();
    let mut check = |field: &str, got: String, want: String| {
        if got != want {
            out.push(format!("{field}: got {got}, want {want}"));
        }
    };
    check("position", ctx.position.as_str().to_string(), entry.position.clone());
    check("variables", format!("{:?}", ctx.variables), format!("{:?}", entry.variables));
    check("partial_token", format!("{:?}", ctx.partial_token), format!("{:?}", entry.partial_token));
    check(
        "focus_subject",
        format!("{:?}", ctx.focus_subject.as_ref().map(ToString::to_string)),
        format!("{:?}", entry.focus_subject),
    );
    let prefixes: BTreeMap<String, String> =
        ctx.prefixes.iter().map(|(k, v)| (k.clone(), v.as_str().to_string())).collect();
    check("prefixes", format!("{prefixes:?}"), format!("{:?}", entry.prefixes));
    let graphs = |g: &[Iri]| format!("{:?}", g.iter().map(Iri::as_str).collect::<Vec<_>>());
    check("from_graphs", graphs(&ctx.from_graphs), format!("{:?}", entry.from_graphs));
    check("from_named", graphs(&ctx.from_named), format!("{:?}", entry.from_named));
    out
}

/// Graph equality up to blank node relabeling, by trying every bijection
/// between the two blank label sets. Only meant for small fixtures.
pub fn isomorphic(a: &sparql_assist_core::Graph, b: &sparql_assist_core::Graph) -> bool {
    use sparql_assist_core::{Node, Triple};
    fn blanks(g: &sparql_assist_core::Graph) -> Vec<String> {
        let mut out = BTreeSet::new();
        for t in g.iter() {
            for n in [t.subject(), t.object()] {
                if let Node::Blank(b) = n {
                    out.insert(b.clone());
                }
            }
        }
        out.into_iter().collect()
    }
    fn relabel(g: &sparql_assist_core::Graph, map: &BTreeMap<String, String>) -> BTreeSet<Triple> {
        let node = |n: &Node| match n {
            Node::Blank(b) => Node::Blank(map[b].clone()),
            other => other.clone(),
        };
        g.iter()
            .map(|t| Triple::new(node(t.subject()), t.predicate().clone(), node(t.object())).unwrap())
            .collect()
    }
    fn search(
        left: &[String],
        right: &[String],
        used: &mut Vec<bool>,
        map: &mut BTreeMap<String, String>,
        a: &sparql_assist_core::Graph,
        target: &BTreeSet<Triple>,
    ) -> bool {
        if map.len() == left.len() {
            return relabel(a, map) == *target;
        }
        let next = &left[map.len()];
        for (j, r) in right.iter().enumerate() {
            if used[j] {
                continue;
            }
            used[j] = true;
            map.insert(next.clone(), r.clone());
            if search(left, right, used, map, a, target) {
                return true;
            }
            map.remove(next);
            used[j] = false;
        }
        false
    }
    if a.len() != b.len() {
        return false;
    }
    let (la, lb) = (blanks(a), blanks(b));
    if la.len() != lb.len() {
        return false;
    }
    let target: BTreeSet<Triple> = b.iter().cloned().collect();
    search(&la, &lb, &mut vec![false; lb.len()], &mut BTreeMap::new(), a, &target)
}

/// The Turtle/N-Triples fixture pairs, as (name, turtle text, N-Triples text).
pub fn graph_fixture_pairs() -> Vec<(String, String, String)> {
    let dir = fixture("graphs");
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .expect("graph fixtures present")
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter_map(|n| n.strip_suffix(".ttl").map(str::to_string))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let ttl = std::fs::read_to_string(dir.join(format!("{n}.ttl"))).unwrap();
            let nt = std::fs::read_to_string(dir.join(format!("{n}.nt"))).unwrap();
            (n, ttl, nt)
        })
        .collect()
}
