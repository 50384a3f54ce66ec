//! Turtle subset: `@prefix`/`@base` (and the SPARQL-style `PREFIX`/`BASE`),
//! prefixed names, `a`, `;` and `,` abbreviations, labeled blank nodes,
//! numeric/boolean literals, language-tagged and datatyped literals, short
//! and long quoting. Collections and `[...]` are rejected by name.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use super::scan::{ScanError, Scanner};
use super::{resolve_iri, vocab, Graph, Iri, Literal, Node, RdfError, Triple};
use crate::chars::is_pn_chars_base;

pub fn parse_turtle(text: &str, base: Option<&Iri>) -> Result<Graph, RdfError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut parser = Parser {
        s: Scanner::new(text, 1),
        prefixes: BTreeMap::new(),
        base: base.cloned(),
        graph: Graph::new(),
    };
    parser.document().map_err(|e| match e {
        Failure::Syntax(ScanError {
            line,
            column,
            message,
        }) => RdfError::TurtleSyntax {
            line,
            column,
            message,
        },
        Failure::Unsupported {
            line,
            column,
            construct,
        } => RdfError::Unsupported {
            line,
            column,
            construct,
        },
    })?;
    Ok(parser.graph)
}

enum Failure {
    Syntax(ScanError),
    Unsupported {
        line: usize,
        column: usize,
        construct: &'static str,
    },
}

impl From<ScanError> for Failure {
    fn from(e: ScanError) -> Self {
        Failure::Syntax(e)
    }
}

type PResult<T> = Result<T, Failure>;

struct Parser<'a> {
    s: Scanner<'a>,
    prefixes: BTreeMap<String, String>,
    base: Option<Iri>,
    graph: Graph,
}

impl<'a> Parser<'a> {
    fn document(&mut self) -> PResult<()> {
        loop {
            self.s.skip_ws_and_comments();
            if self.s.at_end() {
                return Ok(());
            }
            self.statement()?;
        }
    }

    fn unsupported<T>(&self, construct: &'static str) -> PResult<T> {
        Err(Failure::Unsupported {
            line: self.s.line(),
            column: self.s.column(),
            construct,
        })
    }

    fn statement(&mut self) -> PResult<()> {
        if self.s.starts_with("@prefix") {
            self.s.advance_by("@prefix".len());
            self.prefix_decl()?;
            return self.expect_dot();
        }
        if self.s.starts_with("@base") {
            self.s.advance_by("@base".len());
            self.base_decl()?;
            return self.expect_dot();
        }
        if self.s.starts_with_keyword_ci("PREFIX") {
            self.s.advance_by("PREFIX".len());
            return self.prefix_decl();
        }
        if self.s.starts_with_keyword_ci("BASE") {
            self.s.advance_by("BASE".len());
            return self.base_decl();
        }
        self.triples()?;
        self.expect_dot()
    }

    fn expect_dot(&mut self) -> PResult<()> {
        self.s.skip_ws_and_comments();
        if self.s.eat('.') {
            Ok(())
        } else {
            Ok(self.s.err("expected '.'")?)
        }
    }

    fn prefix_decl(&mut self) -> PResult<()> {
        self.s.skip_ws_and_comments();
        let (prefix, local) = self.s.pname()?;
        if !local.is_empty() {
            return Ok(self.s.err("expected prefix name ending in ':'")?);
        }
        let prefix = String::from(prefix);
        self.s.skip_ws_and_comments();
        let iri = self.iriref()?;
        self.prefixes.insert(prefix, iri.into_string());
        Ok(())
    }

    fn base_decl(&mut self) -> PResult<()> {
        self.s.skip_ws_and_comments();
        let iri = self.iriref()?;
        self.base = Some(iri);
        Ok(())
    }

    fn iriref(&mut self) -> PResult<Iri> {
        let raw = self.s.iriref()?;
        match resolve_iri(&raw, self.base.as_ref()).map(Iri::new) {
            Some(Ok(iri)) => Ok(iri),
            Some(Err(e)) => Ok(self.s.err(format!("{e}"))?),
            None => Ok(self.s.err(format!("relative IRI <{raw}> without base"))?),
        }
    }

    fn prefixed_name(&mut self) -> PResult<Iri> {
        let (prefix, local) = self.s.pname()?;
        let Some(ns) = self.prefixes.get(prefix) else {
            return Ok(self.s.err(format!("undeclared prefix '{prefix}:'"))?);
        };
        match Iri::new(format!("{ns}{local}")) {
            Ok(iri) => Ok(iri),
            Err(e) => Ok(self.s.err(format!("{e}"))?),
        }
    }

    fn iri(&mut self) -> PResult<Iri> {
        if self.s.peek() == Some('<') {
            self.iriref()
        } else {
            self.prefixed_name()
        }
    }

    fn triples(&mut self) -> PResult<()> {
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> PResult<Node> {
        match self.s.peek() {
            Some('<') => Ok(Node::Iri(self.iriref()?)),
            Some('_') if self.s.peek_nth(1) == Some(':') => Ok(Node::Blank(self.s.blank_label()?)),
            Some('(') => self.unsupported("collection"),
            Some('[') => self.unsupported("blank node property list"),
            Some(c) if is_pn_chars_base(c) || c == ':' => Ok(Node::Iri(self.prefixed_name()?)),
            _ => Ok(self.s.err("expected subject")?),
        }
    }

    fn predicate_object_list(&mut self, subject: &Node) -> PResult<()> {
        loop {
            self.s.skip_ws_and_comments();
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            self.s.skip_ws_and_comments();
            if !self.s.eat(';') {
                return Ok(());
            }
            // repeated or trailing semicolons are allowed
            loop {
                self.s.skip_ws_and_comments();
                if !self.s.eat(';') {
                    break;
                }
            }
            self.s.skip_ws_and_comments();
            if matches!(self.s.peek(), Some('.') | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> PResult<Iri> {
        if self.s.peek() == Some('a')
            && self
                .s
                .peek_nth(1)
                .is_none_or(|c| c.is_whitespace() || matches!(c, '<' | '"' | '\'' | '_' | '[' | '(' | '#'))
        {
            self.s.bump();
            return Ok(Iri::new_unchecked(String::from(vocab::RDF_TYPE)));
        }
        match self.s.peek() {
            Some('<') => self.iriref(),
            Some(c) if is_pn_chars_base(c) || c == ':' => self.prefixed_name(),
            _ => Ok(self.s.err("expected predicate")?),
        }
    }

    fn object_list(&mut self, subject: &Node, predicate: &Iri) -> PResult<()> {
        loop {
            self.s.skip_ws_and_comments();
            let object = self.object()?;
            if let Some(t) = Triple::new(subject.clone(), predicate.clone(), object) {
                self.graph.insert(t);
            }
            self.s.skip_ws_and_comments();
            if !self.s.eat(',') {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> PResult<Node> {
        match self.s.peek() {
            Some('<') => Ok(Node::Iri(self.iriref()?)),
            Some('_') if self.s.peek_nth(1) == Some(':') => Ok(Node::Blank(self.s.blank_label()?)),
            Some('(') => self.unsupported("collection"),
            Some('[') => self.unsupported("blank node property list"),
            Some('"' | '\'') => Ok(Node::Literal(self.rdf_literal()?)),
            Some(c) if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => {
                Ok(Node::Literal(self.numeric_literal()?))
            }
            Some(_) if self.s.starts_with_keyword_ci("true") && self.s.starts_with("true") => {
                self.s.advance_by(4);
                Ok(Node::Literal(Literal::typed("true", xsd(vocab::XSD_BOOLEAN))))
            }
            Some(_) if self.s.starts_with_keyword_ci("false") && self.s.starts_with("false") => {
                self.s.advance_by(5);
                Ok(Node::Literal(Literal::typed("false", xsd(vocab::XSD_BOOLEAN))))
            }
            Some(c) if is_pn_chars_base(c) || c == ':' => Ok(Node::Iri(self.prefixed_name()?)),
            _ => Ok(self.s.err("expected object")?),
        }
    }

    fn rdf_literal(&mut self) -> PResult<Literal> {
        let lexical = self.s.string(true)?;
        if self.s.peek() == Some('@') {
            let tag = self.s.langtag()?;
            return match Literal::lang_tagged(lexical, tag) {
                Ok(lit) => Ok(lit),
                Err(e) => Ok(self.s.err(format!("{e}"))?),
            };
        }
        if self.s.starts_with("^^") {
            self.s.advance_by(2);
            let dt = self.iri()?;
            return Ok(Literal::typed(lexical, dt));
        }
        Ok(Literal::simple(lexical))
    }

    fn numeric_literal(&mut self) -> PResult<Literal> {
        let rest = self.s.rest();
        let bytes = rest.as_bytes();
        let mut i = 0;
        if matches!(bytes.first(), Some(b'+' | b'-')) {
            i += 1;
        }
        let int_start = i;
        while bytes.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        let int_digits = i - int_start;
        let mut frac_digits = 0;
        if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
            i += 1;
            while bytes.get(i).is_some_and(u8::is_ascii_digit) {
                i += 1;
                frac_digits += 1;
            }
        }
        let mut exponent = false;
        if int_digits + frac_digits > 0 && matches!(bytes.get(i), Some(b'e' | b'E')) {
            let mut j = i + 1;
            if matches!(bytes.get(j), Some(b'+' | b'-')) {
                j += 1;
            }
            if bytes.get(j).is_some_and(u8::is_ascii_digit) {
                while bytes.get(j).is_some_and(u8::is_ascii_digit) {
                    j += 1;
                }
                i = j;
                exponent = true;
            }
        }
        if int_digits + frac_digits == 0 {
            return Ok(self.s.err("expected number")?);
        }
        let lexical = String::from(&rest[..i]);
        self.s.advance_by(i);
        let dt = if exponent {
            vocab::XSD_DOUBLE
        } else if frac_digits > 0 {
            vocab::XSD_DECIMAL
        } else {
            vocab::XSD_INTEGER
        };
        Ok(Literal::typed(lexical, xsd(dt)))
    }
}

fn xsd(iri: &str) -> Iri {
    Iri::new_unchecked(String::from(iri))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_ntriples;

    #[test]
    fn dc_title_prefix_expansion() {
        let g = parse_turtle(
            "@prefix dc: <http://purl.org/dc/elements/1.1/> . <http://x/a> dc:title \"T\" .",
            None,
        )
        .unwrap();
        assert_eq!(g.len(), 1);
        let t = g.iter().next().unwrap();
        assert_eq!(t.predicate().as_str(), "http://purl.org/dc/elements/1.1/title");
        assert!(t.predicate().as_str().ends_with("/title"));
    }

    #[test]
    fn a_keyword_is_rdf_type() {
        let g = parse_turtle("<http://x/a> a <http://x/C> .", None).unwrap();
        assert_eq!(g.iter().next().unwrap().predicate().as_str(), vocab::RDF_TYPE);
    }

    #[test]
    fn abbreviations_match_expanded_ntriples() {
        let ttl = r#"
            @prefix ex: <http://example.org/> .
            @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
            ex:a a ex:C ;
                 rdfs:label "Alpha"@en, "Alpha"@DE ;
                 ex:knows ex:b, _:n1 ;
                 ex:count 42 ;
                 ex:ratio 1.5 ;
                 ex:big 1e3 ;
                 ex:flag true .
            _:n1 ex:note """multi
line"""^^ex:Text .
        "#;
        let nt = r#"
<http://example.org/a> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://example.org/C> .
<http://example.org/a> <http://www.w3.org/2000/01/rdf-schema#label> "Alpha"@en .
<http://example.org/a> <http://www.w3.org/2000/01/rdf-schema#label> "Alpha"@de .
<http://example.org/a> <http://example.org/knows> <http://example.org/b> .
<http://example.org/a> <http://example.org/knows> _:n1 .
<http://example.org/a> <http://example.org/count> "42"^^<http://www.w3.org/2001/XMLSchema#integer> .
<http://example.org/a> <http://example.org/ratio> "1.5"^^<http://www.w3.org/2001/XMLSchema#decimal> .
<http://example.org/a> <http://example.org/big> "1e3"^^<http://www.w3.org/2001/XMLSchema#double> .
<http://example.org/a> <http://example.org/flag> "true"^^<http://www.w3.org/2001/XMLSchema#boolean> .
_:n1 <http://example.org/note> "multi\nline"^^<http://example.org/Text> .
"#;
        assert_eq!(parse_turtle(ttl, None).unwrap(), parse_ntriples(nt).unwrap());
    }

    #[test]
    fn unsupported_constructs_are_named() {
        let err = parse_turtle("<http://x/a> <http://x/p> ( 1 2 ) .", None).unwrap_err();
        assert!(matches!(err, RdfError::Unsupported { construct: "collection", .. }), "{err:?}");
        let err = parse_turtle("<http://x/a> <http://x/p> [ <http://x/q> 1 ] .", None).unwrap_err();
        assert!(matches!(err, RdfError::Unsupported { construct: "blank node property list", .. }));
        let err = parse_turtle("[] <http://x/p> 1 .", None).unwrap_err();
        assert!(matches!(err, RdfError::Unsupported { line: 1, column: 1, .. }));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_turtle("<http://x/a> <http://x/p>\n  nope:x .", None).unwrap_err();
        match err {
            RdfError::TurtleSyntax { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("nope"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_turtle("<http://x/a> <http://x/p> <http://x/b>", None).is_err());
    }

    #[test]
    fn base_and_sparql_style_directives() {
        let g = parse_turtle(
            "BASE <http://example.org/dir/>\nPREFIX : <http://example.org/ns#>\n<a> :p <../b> .",
            None,
        )
        .unwrap();
        let t = g.iter().next().unwrap();
        assert_eq!(t.subject().as_iri().unwrap().as_str(), "http://example.org/dir/a");
        assert_eq!(t.predicate().as_str(), "http://example.org/ns#p");
        assert_eq!(t.object().as_iri().unwrap().as_str(), "http://example.org/b");

        let base = Iri::new("http://example.org/doc").unwrap();
        let g = parse_turtle("<#x> <#p> <#y> .", Some(&base)).unwrap();
        assert_eq!(g.iter().next().unwrap().subject().as_iri().unwrap().as_str(), "http://example.org/doc#x");
    }

    #[test]
    fn trailing_dot_after_local_name() {
        let g = parse_turtle("@prefix ex: <http://e/> . ex:a ex:p ex:b.", None).unwrap();
        assert_eq!(g.iter().next().unwrap().object().as_iri().unwrap().as_str(), "http://e/b");
        let g = parse_turtle("@prefix ex: <http://e/> . ex:a ex:p ex:b.c .", None).unwrap();
        assert_eq!(g.iter().next().unwrap().object().as_iri().unwrap().as_str(), "http://e/b.c");
    }

    #[test]
    fn integer_then_statement_dot() {
        let g = parse_turtle("<http://x/a> <http://x/p> 7.", None).unwrap();
        assert_eq!(g.iter().next().unwrap().object().as_literal().unwrap().lexical(), "7");
    }
}
