mod common;

use common::{fixture, graph_fixture_pairs, isomorphic};
use sparql_assist_core::rdf::{parse_ntriples_with, NtMode};
use sparql_assist_core::{parse_ntriples, parse_turtle, Iri, Node};

#[test]
fn turtle_fixtures_match_their_ntriples_renderings() {
    let pairs = graph_fixture_pairs();
    assert_eq!(pairs.len(), 10);
    for (name, ttl, nt) in pairs {
        let from_ttl = parse_turtle(&ttl, None).unwrap_or_else(|e| panic!("{name}.ttl: {e}"));
        let from_nt = parse_ntriples(&nt).unwrap_or_else(|e| panic!("{name}.nt: {e}"));
        assert!(!from_nt.is_empty(), "{name}");
        assert!(isomorphic(&from_ttl, &from_nt), "{name}: graphs differ");
    }
}

#[test]
fn lenient_mode_skips_the_malformed_line() {
    let text = std::fs::read_to_string(fixture("lenient.nt")).unwrap();
    let out = parse_ntriples_with(&text, NtMode::Lenient).unwrap();
    assert_eq!(out.graph.len(), 2);
    assert_eq!(out.diagnostics.len(), 1);
    assert!(parse_ntriples(&text).is_err());
}

#[test]
fn separately_parsed_blank_nodes_stay_distinct_after_merge() {
    let a = parse_turtle("_:b <http://x/p> <http://x/o1> .", None).unwrap();
    let b = parse_turtle("_:b <http://x/p> <http://x/o2> .", None).unwrap();
    let mut a = a;
    a.set_source(Some(Iri::new("http://g/a").unwrap()));
    let mut b = b;
    b.set_source(Some(Iri::new("http://g/b").unwrap()));
    let merged = sparql_assist_core::graph_merge([&a, &b]);
    let blanks: std::collections::BTreeSet<_> = merged
        .iter()
        .filter_map(|t| match t.subject() {
            Node::Blank(label) => Some(label.clone()),
            _ => None,
        })
        .collect();
    assert_eq!(blanks.len(), 2);
}
