use alloc::string::String;
use alloc::vec::Vec;

use super::scan::{ScanResult, Scanner};
use super::{Graph, Iri, Literal, Node, RdfError, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NtMode {
    /// Abort on the first malformed line.
    Strict,
    /// Skip malformed lines and report them as diagnostics.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, Default)]
pub struct NtOutput {
    pub graph: Graph,
    pub diagnostics: Vec<RdfError>,
}

/// Strict N-Triples parse.
pub fn parse_ntriples(text: &str) -> Result<Graph, RdfError> {
    parse_ntriples_with(text, NtMode::Strict).map(|out| out.graph)
}

pub fn parse_ntriples_with(text: &str, mode: NtMode) -> Result<NtOutput, RdfError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut out = NtOutput::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        match parse_line(line, line_no) {
            Ok(Some(triple)) => {
                out.graph.insert(triple);
            }
            Ok(None) => {}
            Err(e) => {
                let err = RdfError::Syntax {
                    line: line_no,
                    message: e.message,
                };
                match mode {
                    NtMode::Strict => return Err(err),
                    NtMode::Lenient => out.diagnostics.push(err),
                }
            }
        }
    }
    Ok(out)
}

fn parse_line(line: &str, line_no: usize) -> ScanResult<Option<Triple>> {
    let mut s = Scanner::new(line, line_no);
    s.skip_ws_and_comments();
    if s.at_end() {
        return Ok(None);
    }
    let subject = match s.peek() {
        Some('<') => {
            let raw = s.iriref()?;
            Node::Iri(absolute(&s, raw)?)
        }
        Some('_') => Node::Blank(s.blank_label()?),
        _ => return s.err("expected IRI or blank node as subject"),
    };
    s.skip_ws_and_comments();
    if s.peek() != Some('<') {
        return s.err("expected IRI as predicate");
    }
    let raw = s.iriref()?;
    let predicate = absolute(&s, raw)?;
    s.skip_ws_and_comments();
    let object = match s.peek() {
        Some('<') => {
            let raw = s.iriref()?;
            Node::Iri(absolute(&s, raw)?)
        }
        Some('_') => Node::Blank(s.blank_label()?),
        Some('"') => Node::Literal(literal(&mut s)?),
        _ => return s.err("expected IRI, blank node or literal as object"),
    };
    s.skip_ws_and_comments();
    if !s.eat('.') {
        return s.err("expected '.' at end of triple");
    }
    s.skip_ws_and_comments();
    if !s.at_end() {
        return s.err("unexpected content after '.'");
    }
    Ok(Triple::new(subject, predicate, object))
}

fn absolute(s: &Scanner<'_>, raw: String) -> ScanResult<Iri> {
    Iri::new(raw).or_else(|e| s.err(alloc::format!("{e}")))
}

fn literal(s: &mut Scanner<'_>) -> ScanResult<Literal> {
    let lexical = s.string(false)?;
    if s.peek() == Some('@') {
        let tag = s.langtag()?;
        return Literal::lang_tagged(lexical, tag).or_else(|e| s.err(alloc::format!("{e}")));
    }
    if s.starts_with("^^") {
        s.advance_by(2);
        let dt = s.iriref()?;
        return Ok(Literal::typed(lexical, absolute(s, dt)?));
    }
    Ok(Literal::simple(lexical))
}
