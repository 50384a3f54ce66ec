//! Term and profile extraction from graphs, and the knowledge-base snapshot.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::index::{build_index, KindSet, Term, TermIndex, TermKind};
use crate::rdf::{vocab, Graph, Iri, Node};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadStatus {
    Loaded,
    Failed(String),
    Pending,
}

impl LoadStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LoadStatus::Loaded => "loaded",
            LoadStatus::Failed(_) => "failed",
            LoadStatus::Pending => "pending",
        }
    }
}

pub type IriSetMap = BTreeMap<Iri, BTreeSet<Iri>>;

/// Immutable snapshot of everything the suggestion engine reads.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    pub index: Arc<TermIndex>,
    pub individual_properties: IriSetMap,
    pub class_properties: IriSetMap,
    /// Direct `rdfs:subClassOf` edges.
    pub subclass_of: IriSetMap,
    pub types_of: IriSetMap,
    pub loaded_graphs: BTreeMap<Iri, LoadStatus>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn generation(&self) -> u64 {
        self.index.generation()
    }

    /// Adds the graph's terms and profiles, producing the next generation.
    pub fn ingest(&self, graph: &Graph) -> KnowledgeBase {
        self.ingest_all(core::iter::once(graph), Vec::new())
    }

    /// Adds several graphs plus extra terms as a single new generation.
    pub fn ingest_all<'a, I>(&self, graphs: I, extra_terms: Vec<Term>) -> KnowledgeBase
    where
        I: IntoIterator<Item = &'a Graph>,
    {
        let mut kb = self.clone();
        let mut terms = extra_terms;
        for graph in graphs {
            terms.extend(extract_terms(graph));
            kb = extract_profiles(graph, &kb);
        }
        // resources with known properties are always resolvable by IRI
        for iri in kb.individual_properties.keys() {
            if self.index.term(iri.as_str()).is_none() {
                terms.push(Term::new(iri.clone(), TermKind::Individual));
            }
        }
        kb.index = Arc::new(self.index.swap_generation(terms));
        kb
    }

    /// New generation with only the given terms added.
    pub fn with_terms(&self, terms: Vec<Term>) -> KnowledgeBase {
        let mut kb = self.clone();
        kb.index = Arc::new(self.index.swap_generation(terms));
        kb
    }

    pub fn set_status(&mut self, graph: Iri, status: LoadStatus) {
        self.loaded_graphs.insert(graph, status);
    }

    /// Reflexive-transitive `rdfs:subClassOf` closure of `class`.
    /// Terminates on cycles.
    pub fn superclasses(&self, class: &Iri) -> BTreeSet<Iri> {
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![class.clone()];
        while let Some(c) = stack.pop() {
            if !seen.insert(c.clone()) {
                continue;
            }
            if let Some(parents) = self.subclass_of.get(&c) {
                stack.extend(parents.iter().filter(|p| !seen.contains(*p)).cloned());
            }
        }
        seen
    }

    /// True if some type in `types` is `class` or a subclass of it.
    pub fn is_subclass_of_any(&self, types: &BTreeSet<Iri>, class: &Iri) -> bool {
        types.iter().any(|t| self.superclasses(t).contains(class))
    }
}

/// True for IRIs in the RDF, RDFS, OWL and XSD namespaces.
pub fn is_vocabulary(iri: &Iri) -> bool {
    let s = iri.as_str();
    [vocab::RDF, vocab::RDFS, vocab::OWL, vocab::XSD].iter().any(|ns| s.starts_with(ns))
}

/// Kind implied by `rdf:type class`, if `class` is a kind-declaring class.
pub fn declared_kind(class: &str) -> Option<TermKind> {
    match class {
        vocab::OWL_CLASS | vocab::RDFS_CLASS => Some(TermKind::OntClass),
        vocab::OWL_OBJECT_PROPERTY | vocab::OWL_DATATYPE_PROPERTY | vocab::OWL_ANNOTATION_PROPERTY | vocab::RDF_PROPERTY => {
            Some(TermKind::Property)
        }
        _ => None,
    }
}

/// Terms of a graph, sorted by IRI.
///
/// Kinds come from `rdf:type` declarations; undeclared resources are
/// individuals. Predicates are always properties. Non-vocabulary objects of
/// `rdf:type` and both ends of `rdfs:subClassOf` are classes.
pub fn extract_terms(graph: &Graph) -> Vec<Term> {
    let mut terms: BTreeMap<&Iri, Term> = BTreeMap::new();
    let mut kinds: BTreeMap<&Iri, KindSet> = BTreeMap::new();

    for triple in graph {
        let p = triple.predicate();
        let k = kinds.entry(p).or_default();
        *k = k.with(TermKind::Property);
        let subject = triple.subject().as_iri();
        if let Some(s) = subject {
            kinds.entry(s).or_default();
        }
        match (p.as_str(), triple.object()) {
            (vocab::RDF_TYPE, Node::Iri(class)) => {
                if let Some(s) = subject {
                    if let Some(kind) = declared_kind(class.as_str()) {
                        let k = kinds.get_mut(s).expect("inserted");
                        *k = k.with(kind);
                    }
                }
                if !is_vocabulary(class) {
                    let k = kinds.entry(class).or_default();
                    *k = k.with(TermKind::OntClass);
                }
            }
            (vocab::RDFS_SUBCLASS_OF, Node::Iri(parent)) => {
                for c in subject.into_iter().chain(Some(parent)) {
                    if !is_vocabulary(c) {
                        let k = kinds.entry(c).or_default();
                        *k = k.with(TermKind::OntClass);
                    }
                }
            }
            (_, Node::Iri(o)) => {
                kinds.entry(o).or_default();
            }
            (pred, Node::Literal(lit)) if pred == vocab::RDFS_LABEL || pred == vocab::RDFS_COMMENT => {
                if let Some(s) = subject {
                    let term = terms.entry(s).or_insert_with(|| Term::new(s.clone(), TermKind::Individual));
                    let lang = lit.lang().unwrap_or("");
                    if pred == vocab::RDFS_LABEL {
                        term.add_label(lang, lit.lexical());
                    } else {
                        term.add_description(lang, lit.lexical());
                    }
                }
            }
            _ => {}
        }
    }

    kinds
        .into_iter()
        .map(|(iri, kinds)| {
            let mut term = terms.remove(iri).unwrap_or_else(|| Term::new(iri.clone(), TermKind::Individual));
            term.kinds = kinds.settled();
            term.source = graph.source().cloned();
            term
        })
        .collect()
}

/// Adds the graph's individual and class profiles and subclass edges to a
/// copy of `kb`. The index is not touched.
pub fn extract_profiles(graph: &Graph, kb: &KnowledgeBase) -> KnowledgeBase {
    let mut out = kb.clone();
    let mut touched: BTreeSet<&Iri> = BTreeSet::new();
    for triple in graph {
        let Some(s) = triple.subject().as_iri() else {
            continue;
        };
        let p = triple.predicate();
        touched.insert(s);
        out.individual_properties.entry(s.clone()).or_default().insert(p.clone());
        match (p.as_str(), triple.object()) {
            (vocab::RDF_TYPE, Node::Iri(class)) => {
                out.types_of.entry(s.clone()).or_default().insert(class.clone());
            }
            (vocab::RDFS_SUBCLASS_OF, Node::Iri(parent)) => {
                out.subclass_of.entry(s.clone()).or_default().insert(parent.clone());
            }
            _ => {}
        }
    }
    // Recompute class profiles for every touched individual from its full
    // (old plus new) type and property sets, so the result does not depend
    // on how triples were split across graphs.
    for s in touched {
        let (Some(types), Some(props)) = (out.types_of.get(s), out.individual_properties.get(s)) else {
            continue;
        };
        for class in types {
            let entry = out.class_properties.entry(class.clone()).or_default();
            entry.extend(props.iter().filter(|p| p.as_str() != vocab::RDF_TYPE).cloned());
        }
    }
    out
}

/// Builds a generation-0 knowledge base from graphs.
pub fn knowledge_base_from<'a, I>(graphs: I) -> KnowledgeBase
where
    I: IntoIterator<Item = &'a Graph>,
{
    let mut kb = KnowledgeBase {
        index: Arc::new(build_index(Vec::new())),
        ..KnowledgeBase::default()
    };
    let mut terms = Vec::new();
    for graph in graphs {
        terms.extend(extract_terms(graph));
        kb = extract_profiles(graph, &kb);
    }
    for iri in kb.individual_properties.keys() {
        terms.push(Term::new(iri.clone(), TermKind::Individual));
    }
    kb.index = Arc::new(build_index(terms));
    kb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{parse_turtle, Literal, Triple};
    use alloc::vec;

    const PREFIXES: &str = "@prefix : <http://x/> .
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
";

    fn graph(body: &str) -> Graph {
        parse_turtle(&alloc::format!("{PREFIXES}{body}"), None).unwrap()
    }

    fn iri(s: &str) -> Iri {
        Iri::new(alloc::format!("http://x/{s}")).unwrap()
    }

    fn kinds_of(terms: &[Term]) -> Vec<(&str, TermKind)> {
        terms.iter().map(|t| (t.iri.local_name(), t.kind())).collect()
    }

    #[test]
    fn declared_property_with_label() {
        let terms = extract_terms(&graph(":p a owl:ObjectProperty ; rdfs:label \"has part\"@en ."));
        let p = terms.iter().find(|t| t.iri == iri("p")).unwrap();
        assert_eq!(p.kind(), TermKind::Property);
        assert_eq!(p.labels["en"].iter().collect::<Vec<_>>(), vec!["has part"]);
    }

    #[test]
    fn undeclared_resources() {
        let terms = extract_terms(&graph(":a :p :b ."));
        assert_eq!(
            kinds_of(&terms),
            vec![("a", TermKind::Individual), ("b", TermKind::Individual), ("p", TermKind::Property)]
        );
    }

    #[test]
    fn type_objects_are_classes_and_vocabulary_is_skipped() {
        let terms = extract_terms(&graph(":a a :C . :C a owl:Class . :D rdfs:subClassOf :C ."));
        let names: Vec<_> = kinds_of(&terms);
        assert!(names.contains(&("C", TermKind::OntClass)));
        assert!(names.contains(&("D", TermKind::OntClass)));
        assert!(names.contains(&("a", TermKind::Individual)));
        assert!(!terms.iter().any(|t| t.iri.as_str() == vocab::OWL_CLASS));
    }

    #[test]
    fn bilingual_labels_on_one_class() {
        let terms = extract_terms(&graph(
            ":Gene a owl:Class ; rdfs:label \"gene\"@en, \"Gen\"@de ; rdfs:comment \"a unit of heredity\"@en .",
        ));
        let gene = terms.iter().find(|t| t.iri == iri("Gene")).unwrap();
        assert_eq!(gene.labels.keys().collect::<Vec<_>>(), vec!["de", "en"]);
        assert_eq!(gene.descriptions["en"].len(), 1);
    }

    #[test]
    fn profiles() {
        let kb = extract_profiles(&graph(":a a :C ; :p :b ."), &KnowledgeBase::new());
        let a_props: Vec<_> = kb.individual_properties[&iri("a")].iter().map(Iri::as_str).collect();
        assert_eq!(a_props, vec![vocab::RDF_TYPE, "http://x/p"]);
        assert!(kb.class_properties[&iri("C")].contains(&iri("p")));
        assert!(kb.types_of[&iri("a")].contains(&iri("C")));

        let same = extract_profiles(&Graph::new(), &kb);
        assert_eq!(same.individual_properties, kb.individual_properties);
    }

    #[test]
    fn profiles_do_not_depend_on_graph_split() {
        let kb = KnowledgeBase::new();
        let split = extract_profiles(&graph(":a :p :b ."), &extract_profiles(&graph(":a a :C ."), &kb));
        let whole = extract_profiles(&graph(":a a :C ; :p :b ."), &kb);
        assert_eq!(split.class_properties, whole.class_properties);
    }

    #[test]
    fn subclass_closure_handles_cycles() {
        let kb = extract_profiles(
            &graph(":A rdfs:subClassOf :B . :B rdfs:subClassOf :C . :C rdfs:subClassOf :A ."),
            &KnowledgeBase::new(),
        );
        assert_eq!(kb.superclasses(&iri("A")).len(), 3);
        assert!(kb.superclasses(&iri("Z")).contains(&iri("Z")));
    }

    #[test]
    fn ingest_advances_generation_and_indexes_individuals() {
        let mut g = Graph::new();
        g.insert(Triple::new(Node::Iri(iri("i")), iri("p"), Node::Literal(Literal::simple("v"))).unwrap());
        let kb = KnowledgeBase::new().ingest(&g);
        assert_eq!(kb.generation(), 1);
        assert!(kb.index.term("http://x/i").unwrap().has_kind(TermKind::Individual));
        assert!(kb.index.term("http://x/p").unwrap().has_kind(TermKind::Property));
    }
}
