use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{vocab, Graph, Iri, Literal, Node, Triple};
use crate::chars::{is_pn_prefix, is_simple_local};

pub fn to_ntriples(graph: &Graph) -> String {
    let mut out = String::new();
    for t in graph {
        write_node(&mut out, t.subject(), &[]);
        out.push(' ');
        write_iri(&mut out, t.predicate(), &[]);
        out.push(' ');
        write_node(&mut out, t.object(), &[]);
        out.push_str(" .\n");
    }
    out
}

/// Renders with `@prefix` declarations for `prefixes` and groups triples by
/// subject (`;`) and predicate (`,`).
pub fn to_turtle(graph: &Graph, prefixes: &[(&str, &str)]) -> String {
    let prefixes: Vec<(&str, &str)> = prefixes
        .iter()
        .copied()
        .filter(|(p, _)| is_pn_prefix(p))
        .collect();
    let mut out = String::new();
    for (p, ns) in &prefixes {
        let _ = writeln!(out, "@prefix {p}: <{ns}> .");
    }
    if !prefixes.is_empty() {
        out.push('\n');
    }
    let mut by_subject: BTreeMap<&Node, BTreeMap<&Iri, Vec<&Node>>> = BTreeMap::new();
    for Triple {
        subject,
        predicate,
        object,
    } in graph
    {
        by_subject
            .entry(subject)
            .or_default()
            .entry(predicate)
            .or_default()
            .push(object);
    }
    for (subject, preds) in by_subject {
        write_node(&mut out, subject, &prefixes);
        let mut first_pred = true;
        for (pred, objects) in preds {
            if first_pred {
                out.push(' ');
                first_pred = false;
            } else {
                out.push_str(" ;\n    ");
            }
            if pred.as_str() == vocab::RDF_TYPE {
                out.push('a');
            } else {
                write_iri(&mut out, pred, &prefixes);
            }
            out.push(' ');
            for (i, obj) in objects.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_node(&mut out, obj, &prefixes);
            }
        }
        out.push_str(" .\n");
    }
    out
}

fn write_node(out: &mut String, node: &Node, prefixes: &[(&str, &str)]) {
    match node {
        Node::Iri(iri) => write_iri(out, iri, prefixes),
        Node::Blank(label) => {
            out.push_str("_:");
            out.push_str(label);
        }
        Node::Literal(lit) => write_literal(out, lit, prefixes),
    }
}

fn write_iri(out: &mut String, iri: &Iri, prefixes: &[(&str, &str)]) {
    for (p, ns) in prefixes {
        if let Some(local) = iri.as_str().strip_prefix(ns) {
            if is_simple_local(local) {
                out.push_str(p);
                out.push(':');
                out.push_str(local);
                return;
            }
        }
    }
    out.push('<');
    for c in iri.as_str().chars() {
        if crate::chars::is_iri_char(c) {
            out.push(c);
        } else {
            let _ = write!(out, "\\u{:04X}", c as u32);
        }
    }
    out.push('>');
}

fn write_literal(out: &mut String, lit: &Literal, prefixes: &[(&str, &str)]) {
    out.push('"');
    for c in lit.lexical().chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    if let Some(lang) = lit.lang() {
        out.push('@');
        out.push_str(lang);
    } else if let Some(dt) = lit.datatype() {
        out.push_str("^^");
        write_iri(out, dt, prefixes);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{parse_ntriples, parse_turtle};

    #[test]
    fn both_renderings_parse_back() {
        let src = r#"
<http://e/a> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://e/C> .
<http://e/a> <http://www.w3.org/2000/01/rdf-schema#label> "x \"q\"\n"@en .
<http://e/a> <http://e/p> _:b0 .
_:b0 <http://e/p> "1"^^<http://www.w3.org/2001/XMLSchema#integer> .
"#;
        let g = parse_ntriples(src).unwrap();
        let prefixes = [("e", "http://e/"), ("rdfs", vocab::RDFS), ("xsd", vocab::XSD)];
        assert_eq!(parse_ntriples(&to_ntriples(&g)).unwrap(), g);
        let ttl = to_turtle(&g, &prefixes);
        assert!(ttl.contains(" ;\n"));
        assert_eq!(parse_turtle(&ttl, None).unwrap(), g);
    }
}
