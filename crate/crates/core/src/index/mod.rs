//! Multilingual label index with normalized prefix search.

mod normalize;

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt::{self, Write as _};
use core::ops::Bound;

pub use normalize::normalize_label;

use crate::rdf::{normalize_lang_tag, Iri};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    OntClass,
    Property,
    Individual,
    Graph,
    /// Syntax suggestions only; never stored in an index.
    Keyword,
}

impl TermKind {
    pub const ALL: [TermKind; 5] = [
        TermKind::OntClass,
        TermKind::Property,
        TermKind::Individual,
        TermKind::Graph,
        TermKind::Keyword,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TermKind::OntClass => "ONT_CLASS",
            TermKind::Property => "PROPERTY",
            TermKind::Individual => "INDIVIDUAL",
            TermKind::Graph => "GRAPH",
            TermKind::Keyword => "KEYWORD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        TermKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Set of kinds. A term can be both a class and a property (punning).
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KindSet(u8);

impl KindSet {
    pub const EMPTY: KindSet = KindSet(0);

    pub fn of(kinds: &[TermKind]) -> Self {
        kinds.iter().fold(KindSet::EMPTY, |set, &k| set.with(k))
    }

    pub fn with(self, kind: TermKind) -> Self {
        KindSet(self.0 | kind.bit())
    }

    pub fn contains(self, kind: TermKind) -> bool {
        self.0 & kind.bit() != 0
    }

    pub fn intersects(self, other: KindSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = TermKind> {
        TermKind::ALL.into_iter().filter(move |&k| self.contains(k))
    }

    /// Union for merging declarations of the same IRI. INDIVIDUAL is the
    /// fallback kind for undeclared resources, so it yields to any class or
    /// property declaration.
    pub fn merge(self, other: KindSet) -> Self {
        KindSet(self.0 | other.0).settled()
    }

    pub(crate) fn settled(self) -> Self {
        let mut bits = self.0 & !TermKind::Keyword.bit();
        if bits & (TermKind::OntClass.bit() | TermKind::Property.bit()) != 0 {
            bits &= !TermKind::Individual.bit();
        }
        if bits == 0 {
            bits = TermKind::Individual.bit();
        }
        KindSet(bits)
    }
}

impl fmt::Debug for KindSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<TermKind> for KindSet {
    fn from_iter<T: IntoIterator<Item = TermKind>>(iter: T) -> Self {
        iter.into_iter().fold(KindSet::EMPTY, KindSet::with)
    }
}

pub type LangMap = BTreeMap<String, BTreeSet<String>>;

/// An ontology entity. The `""` language key holds untagged text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub iri: Iri,
    pub kinds: KindSet,
    pub labels: LangMap,
    pub descriptions: LangMap,
    pub source: Option<Iri>,
}

impl Term {
    pub fn new(iri: Iri, kind: TermKind) -> Self {
        Term {
            iri,
            kinds: KindSet::EMPTY.with(kind),
            labels: BTreeMap::new(),
            descriptions: BTreeMap::new(),
            source: None,
        }
    }

    pub fn with_label(mut self, lang: &str, text: impl Into<String>) -> Self {
        self.add_label(lang, text);
        self
    }

    pub fn with_description(mut self, lang: &str, text: impl Into<String>) -> Self {
        self.add_description(lang, text);
        self
    }

    pub fn with_source(mut self, source: Iri) -> Self {
        self.source = Some(source);
        self
    }

    pub fn add_label(&mut self, lang: &str, text: impl Into<String>) {
        self.labels.entry(lang.to_ascii_lowercase()).or_default().insert(text.into());
    }

    pub fn add_description(&mut self, lang: &str, text: impl Into<String>) {
        self.descriptions
            .entry(lang.to_ascii_lowercase())
            .or_default()
            .insert(text.into());
    }

    /// The kind reported to clients when a term has several.
    pub fn kind(&self) -> TermKind {
        self.kinds.iter().next().unwrap_or(TermKind::Individual)
    }

    pub fn has_kind(&self, kind: TermKind) -> bool {
        self.kinds.contains(kind)
    }

    /// Unions labels, descriptions and kinds. The first known source wins.
    pub fn merge(&mut self, other: &Term) {
        debug_assert_eq!(self.iri, other.iri);
        self.kinds = self.kinds.merge(other.kinds);
        for (lang, texts) in &other.labels {
            self.labels.entry(lang.clone()).or_default().extend(texts.iter().cloned());
        }
        for (lang, texts) in &other.descriptions {
            self.descriptions
                .entry(lang.clone())
                .or_default()
                .extend(texts.iter().cloned());
        }
        if self.source.is_none() {
            self.source = other.source.clone();
        }
    }

    /// Best label for display: first preferred language, then untagged,
    /// then any language, then the local name.
    pub fn display_label(&self, langs: &LangPref) -> (&str, &str) {
        pick(&self.labels, langs).unwrap_or((self.iri.local_name(), ""))
    }

    pub fn display_description(&self, langs: &LangPref) -> Option<(&str, &str)> {
        pick(&self.descriptions, langs)
    }
}

fn pick<'a>(map: &'a LangMap, langs: &LangPref) -> Option<(&'a str, &'a str)> {
    map.iter()
        .filter_map(|(lang, texts)| texts.iter().next().map(|t| (langs.rank(lang), t.as_str(), lang.as_str())))
        .min()
        .map(|(_, text, lang)| (text, lang))
}

/// Ordered language preference. Untagged text ranks after the listed
/// languages and any other language after that.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LangPref(Vec<String>);

impl LangPref {
    pub fn new<I, S>(langs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out: Vec<String> = Vec::new();
        for lang in langs {
            let lang = lang.as_ref().trim();
            if lang.is_empty() {
                continue;
            }
            let lang = normalize_lang_tag(lang).unwrap_or_else(|_| lang.to_ascii_lowercase());
            if !out.contains(&lang) {
                out.push(lang);
            }
        }
        LangPref(out)
    }

    pub fn langs(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 0..n for listed languages, n for untagged, n+1 for anything else.
    pub fn rank(&self, lang: &str) -> usize {
        if lang.is_empty() {
            return self.0.len();
        }
        self.0.iter().position(|l| l == lang).unwrap_or(self.0.len() + 1)
    }

    /// Search tier of an entry; lower is better. Descriptions sit one step
    /// below labels of the same language and local names come last.
    pub fn tier(&self, lang: &str, field: Field) -> u32 {
        match field {
            Field::Localname => self.localname_tier(),
            Field::Label => 2 * self.rank(lang) as u32,
            Field::Description => 2 * self.rank(lang) as u32 + 1,
        }
    }

    fn localname_tier(&self) -> u32 {
        2 * self.0.len() as u32 + 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Label,
    Description,
    Localname,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Label => "LABEL",
            Field::Description => "DESCRIPTION",
            Field::Localname => "LOCALNAME",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub normalized_key: String,
    pub term: Arc<Term>,
    pub matched_text: String,
    pub lang: String,
    pub field: Field,
}

impl IndexEntry {
    fn sort_key(&self) -> (&str, &Iri, &str, &str, Field) {
        (&self.normalized_key, &self.term.iri, &self.matched_text, &self.lang, self.field)
    }
}

/// One search result with its language tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hit<'a> {
    pub entry: &'a IndexEntry,
    pub tier: u32,
}

impl Hit<'_> {
    /// Rank of the entry's language (`tier` split into its language part).
    pub fn lang_tier(&self) -> u32 {
        self.tier / 2
    }

    /// 1 for labels, 2 for descriptions, 3 for local names.
    pub fn match_tier(&self) -> u32 {
        match self.entry.field {
            Field::Label => 1,
            Field::Description => 2,
            Field::Localname => 3,
        }
    }
}

#[derive(Debug)]
struct Slot {
    term: Arc<Term>,
    entries: Vec<u32>,
}

type BucketKey = (String, Field, TermKind);

/// Immutable search snapshot. Updates produce a new index.
#[derive(Debug)]
pub struct TermIndex {
    entries: Vec<IndexEntry>,
    /// Entry positions per (lang, field, kind), ascending; since `entries` is
    /// sorted, each bucket is sorted by search order too.
    buckets: BTreeMap<BucketKey, Vec<u32>>,
    by_iri: BTreeMap<Iri, Slot>,
    generation: u64,
}

impl Default for TermIndex {
    fn default() -> Self {
        build_index(Vec::new())
    }
}

/// Builds a generation-0 index. Terms sharing an IRI are merged.
pub fn build_index<I: IntoIterator<Item = Term>>(terms: I) -> TermIndex {
    let mut merged: BTreeMap<Iri, Term> = BTreeMap::new();
    for mut term in terms {
        term.kinds = term.kinds.settled();
        match merged.get_mut(&term.iri) {
            Some(existing) => existing.merge(&term),
            None => {
                merged.insert(term.iri.clone(), term);
            }
        }
    }
    from_merged(merged.into_values().map(Arc::new), 0)
}

fn from_merged(terms: impl Iterator<Item = Arc<Term>>, generation: u64) -> TermIndex {
    let mut entries = Vec::new();
    let mut by_iri = BTreeMap::new();
    for term in terms {
        let push = |entries: &mut Vec<IndexEntry>, text: &str, lang: &str, field: Field| {
            entries.push(IndexEntry {
                normalized_key: normalize_label(text),
                term: term.clone(),
                matched_text: text.to_string(),
                lang: lang.to_string(),
                field,
            });
        };
        for (lang, texts) in &term.labels {
            for text in texts {
                push(&mut entries, text, lang, Field::Label);
            }
        }
        for (lang, texts) in &term.descriptions {
            for text in texts {
                push(&mut entries, text, lang, Field::Description);
            }
        }
        let local = term.iri.local_name();
        if !local.is_empty() {
            push(&mut entries, local, "", Field::Localname);
        }
        by_iri.insert(
            term.iri.clone(),
            Slot {
                term: term.clone(),
                entries: Vec::new(),
            },
        );
    }
    entries.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    let mut buckets: BTreeMap<BucketKey, Vec<u32>> = BTreeMap::new();
    for (pos, entry) in entries.iter().enumerate() {
        let pos = pos as u32;
        for kind in entry.term.kinds.iter() {
            buckets
                .entry((entry.lang.clone(), entry.field, kind))
                .or_default()
                .push(pos);
        }
        if let Some(slot) = by_iri.get_mut(&entry.term.iri) {
            slot.entries.push(pos);
        }
    }
    TermIndex {
        entries,
        buckets,
        by_iri,
        generation,
    }
}

impl TermIndex {
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.by_iri.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_iri.is_empty()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn term(&self, iri: &str) -> Option<&Arc<Term>> {
        self.by_iri.get(iri).map(|slot| &slot.term)
    }

    pub fn terms(&self) -> impl Iterator<Item = &Arc<Term>> + '_ {
        self.by_iri.values().map(|slot| &slot.term)
    }

    /// Terms whose IRI starts with `prefix`, in IRI order.
    pub fn iris_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Arc<Term>> + 'a {
        self.by_iri
            .range::<str, _>((Bound::Included(prefix), Bound::Unbounded))
            .take_while(move |(iri, _)| iri.as_str().starts_with(prefix))
            .map(|(_, slot)| &slot.term)
    }

    /// Entries whose key starts with `normalize_label(prefix)`, restricted to
    /// `kinds`, ordered by (tier, key, IRI), one per IRI, at most `limit`.
    pub fn prefix_search(&self, prefix: &str, langs: &LangPref, kinds: KindSet, limit: usize) -> Vec<Hit<'_>> {
        let key = normalize_label(prefix);
        self.search_key(&key, langs, kinds, limit, |_| true)
    }

    /// Like [`prefix_search`](Self::prefix_search) with an already
    /// normalized key and an extra predicate over candidate terms.
    pub fn search_key(
        &self,
        key: &str,
        langs: &LangPref,
        kinds: KindSet,
        limit: usize,
        mut accept: impl FnMut(&Term) -> bool,
    ) -> Vec<Hit<'_>> {
        let mut hits = Vec::new();
        if limit == 0 || kinds.is_empty() {
            return hits;
        }
        let mut seen: BTreeSet<&Iri> = BTreeSet::new();
        let n = langs.len() as u32;
        for tier in 0..=langs.localname_tier() {
            let ranges = self.tier_ranges(tier, n, langs, kinds, key);
            if ranges.is_empty() {
                continue;
            }
            let mut heap: BinaryHeap<Reverse<(u32, usize, usize)>> = ranges
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.is_empty())
                .map(|(b, r)| Reverse((r[0], b, 0)))
                .collect();
            while let Some(Reverse((pos, b, i))) = heap.pop() {
                if let Some(&next) = ranges[b].get(i + 1) {
                    heap.push(Reverse((next, b, i + 1)));
                }
                let entry = &self.entries[pos as usize];
                if seen.contains(&entry.term.iri) || !accept(&entry.term) {
                    continue;
                }
                seen.insert(&entry.term.iri);
                hits.push(Hit { entry, tier });
                if hits.len() == limit {
                    return hits;
                }
            }
        }
        hits
    }

    fn tier_ranges(&self, tier: u32, n: u32, langs: &LangPref, kinds: KindSet, key: &str) -> Vec<&[u32]> {
        let field = if tier % 2 == 0 { Field::Label } else { Field::Description };
        let mut out = Vec::new();
        let mut add = |lang: &str, field: Field| {
            for kind in kinds.iter() {
                if let Some(bucket) = self.buckets.get(&(lang.to_string(), field, kind)) {
                    let range = self.key_range(bucket, key);
                    if !range.is_empty() {
                        out.push(range);
                    }
                }
            }
        };
        if tier < 2 * n {
            add(&langs.langs()[(tier / 2) as usize], field);
        } else if tier < 2 * n + 2 {
            add("", field);
        } else if tier < 2 * n + 4 {
            let others: BTreeSet<&str> = self
                .buckets
                .keys()
                .filter(|(lang, f, _)| *f == field && !lang.is_empty() && langs.rank(lang) > n as usize)
                .map(|(lang, _, _)| lang.as_str())
                .collect();
            for lang in others {
                add(lang, field);
            }
        } else {
            add("", Field::Localname);
        }
        out
    }

    fn key_range<'a>(&self, bucket: &'a [u32], key: &str) -> &'a [u32] {
        let start = bucket.partition_point(|&p| self.entries[p as usize].normalized_key.as_str() < key);
        let len = bucket[start..]
            .iter()
            .take_while(|&&p| self.entries[p as usize].normalized_key.starts_with(key))
            .count();
        &bucket[start..start + len]
    }

    /// Best entry of one term whose key starts with `key` (normalized), as
    /// `search_key` would rank it.
    pub fn best_match(&self, iri: &str, key: &str, langs: &LangPref) -> Option<Hit<'_>> {
        let slot = self.by_iri.get(iri)?;
        slot.entries
            .iter()
            .map(|&p| &self.entries[p as usize])
            .filter(|e| e.normalized_key.starts_with(key))
            .map(|entry| Hit {
                entry,
                tier: langs.tier(&entry.lang, entry.field),
            })
            .min_by(|a, b| (a.tier, a.entry.sort_key()).cmp(&(b.tier, b.entry.sort_key())))
    }

    /// New snapshot with `new_terms` merged in and the generation advanced.
    /// `self` is left untouched.
    pub fn swap_generation<I: IntoIterator<Item = Term>>(&self, new_terms: I) -> TermIndex {
        let mut merged: BTreeMap<Iri, Arc<Term>> =
            self.by_iri.iter().map(|(iri, slot)| (iri.clone(), slot.term.clone())).collect();
        for mut term in new_terms {
            term.kinds = term.kinds.settled();
            match merged.get_mut(&term.iri) {
                Some(existing) => Arc::make_mut(existing).merge(&term),
                None => {
                    merged.insert(term.iri.clone(), Arc::new(term));
                }
            }
        }
        from_merged(merged.into_values(), self.generation + 1)
    }

    /// One line per entry: key, lang, field, IRI (tab separated).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", e.normalized_key, e.lang, e.field.as_str(), e.term.iri);
        }
        out
    }
}
