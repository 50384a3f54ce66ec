use alloc::vec::Vec;
use core::fmt;

use crate::chars::{is_iri_char, is_pn_chars, is_pn_chars_base, is_pn_chars_u, is_varname_char};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    /// A bare word: SPARQL keywords, function names, and any other name
    /// without a colon. `ORDER BY`, `GROUP BY` and `FROM NAMED` are single
    /// tokens when separated only by whitespace.
    Keyword,
    Var,
    IriRef,
    PName,
    BlankLabel,
    String,
    Number,
    LangTag,
    Punct,
    AKeyword,
    Comment,
    Whitespace,
    /// An IRI or string still open at the end of the input.
    Incomplete,
}

impl TokenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Keyword => "KEYWORD",
            TokenKind::Var => "VAR",
            TokenKind::IriRef => "IRIREF",
            TokenKind::PName => "PNAME",
            TokenKind::BlankLabel => "BLANK_LABEL",
            TokenKind::String => "STRING",
            TokenKind::Number => "NUMBER",
            TokenKind::LangTag => "LANGTAG",
            TokenKind::Punct => "PUNCT",
            TokenKind::AKeyword => "A_KEYWORD",
            TokenKind::Comment => "COMMENT",
            TokenKind::Whitespace => "WHITESPACE",
            TokenKind::Incomplete => "INCOMPLETE",
        }
    }

    pub fn is_trivia(self) -> bool {
        matches!(self, TokenKind::Whitespace | TokenKind::Comment)
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A token borrowing its text from the input. `start..end` are byte offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

/// Splits `text` into tokens that cover it exactly. Never fails.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < text.len() {
        let (kind, len) = next_token(&text[pos..]);
        debug_assert!(len > 0);
        tokens.push(Token {
            kind,
            text: &text[pos..pos + len],
            start: pos,
            end: pos + len,
        });
        pos += len;
    }
    tokens
}

fn char_len_at(s: &str, i: usize) -> usize {
    s[i..].chars().next().map_or(0, char::len_utf8)
}

fn next_token(s: &str) -> (TokenKind, usize) {
    let c = s.chars().next().expect("non-empty");
    let bytes = s.as_bytes();
    match c {
        c if c.is_whitespace() => {
            let end = s.find(|c: char| !c.is_whitespace()).unwrap_or(s.len());
            (TokenKind::Whitespace, end)
        }
        '#' => (TokenKind::Comment, s.find('\n').unwrap_or(s.len())),
        '?' | '$' => {
            let end = 1 + s[1..].find(|c: char| !is_varname_char(c)).unwrap_or(s.len() - 1);
            (TokenKind::Var, end)
        }
        '<' => iri_or_operator(s),
        '"' | '\'' => string(s, c),
        '@' => {
            let rest = &s[1..];
            if rest.starts_with(|c: char| c.is_ascii_alphabetic()) {
                let mut end = 1 + rest
                    .find(|c: char| !c.is_ascii_alphabetic())
                    .unwrap_or(rest.len());
                while bytes.get(end) == Some(&b'-')
                    && bytes.get(end + 1).is_some_and(u8::is_ascii_alphanumeric)
                {
                    end += 1;
                    while bytes.get(end).is_some_and(u8::is_ascii_alphanumeric) {
                        end += 1;
                    }
                }
                (TokenKind::LangTag, end)
            } else {
                (TokenKind::Punct, 1)
            }
        }
        '0'..='9' => (TokenKind::Number, number(s)),
        '.' if bytes.get(1).is_some_and(u8::is_ascii_digit) => (TokenKind::Number, number(s)),
        '_' if bytes.get(1) == Some(&b':') => {
            let mut end = 2;
            if s[end..].starts_with(|c: char| is_pn_chars_u(c) || c.is_ascii_digit()) {
                end += char_len_at(s, end);
                end = scan_with_inner_dots(s, end, is_pn_chars);
            }
            (TokenKind::BlankLabel, end)
        }
        c if is_pn_chars_base(c) || c == ':' => name(s),
        _ => {
            for op in ["&&", "||", "!=", "<=", ">=", "^^"] {
                if s.starts_with(op) {
                    return (TokenKind::Punct, 2);
                }
            }
            (TokenKind::Punct, c.len_utf8())
        }
    }
}

/// Consumes characters accepted by `ok`, plus dots that are followed by more
/// accepted characters (a trailing dot is never part of a name).
fn scan_with_inner_dots(s: &str, mut end: usize, ok: impl Fn(char) -> bool) -> usize {
    loop {
        let Some(c) = s[end..].chars().next() else {
            return end;
        };
        if ok(c) {
            end += c.len_utf8();
        } else if c == '.' {
            let after = s[end..].trim_start_matches('.');
            if after.starts_with(&ok) {
                end = s.len() - after.len();
            } else {
                return end;
            }
        } else {
            return end;
        }
    }
}

fn iri_or_operator(s: &str) -> (TokenKind, usize) {
    let mut chars = s.char_indices().skip(1);
    while let Some((i, c)) = chars.next() {
        if c == '>' {
            return (TokenKind::IriRef, i + 1);
        }
        if c == '\\' {
            // `\u` escapes; the tokenizer does not validate the hex digits
            continue;
        }
        if !is_iri_char(c) {
            let len = if s.starts_with("<=") { 2 } else { 1 };
            return (TokenKind::Punct, len);
        }
    }
    (TokenKind::Incomplete, s.len())
}

fn string(s: &str, quote: char) -> (TokenKind, usize) {
    let triple: &str = if quote == '"' { "\"\"\"" } else { "'''" };
    if s.starts_with(triple) {
        let mut i = 3;
        while i < s.len() {
            if s[i..].starts_with('\\') {
                i += 1 + s[i + 1..].chars().next().map_or(0, char::len_utf8);
                continue;
            }
            if s[i..].starts_with(triple) {
                let mut end = i + 3;
                // up to two quotes belong to the content: """a"""""
                while end < i + 5 && s[end..].starts_with(quote) {
                    end += 1;
                }
                return (TokenKind::String, end);
            }
            i += char_len_at(s, i);
        }
        return (TokenKind::Incomplete, s.len());
    }
    let mut i = 1;
    while i < s.len() {
        let c = s[i..].chars().next().expect("in bounds");
        if c == '\\' {
            i += 1 + s[i + 1..].chars().next().map_or(0, char::len_utf8);
            continue;
        }
        if c == quote {
            return (TokenKind::String, i + 1);
        }
        i += c.len_utf8();
    }
    (TokenKind::Incomplete, s.len())
}

fn number(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    while b.get(i).is_some_and(u8::is_ascii_digit) {
        i += 1;
    }
    if b.get(i) == Some(&b'.') && b.get(i + 1).is_some_and(u8::is_ascii_digit) {
        i += 1;
        while b.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
    }
    if matches!(b.get(i), Some(b'e' | b'E')) {
        let mut j = i + 1;
        if matches!(b.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        if b.get(j).is_some_and(u8::is_ascii_digit) {
            while b.get(j).is_some_and(u8::is_ascii_digit) {
                j += 1;
            }
            i = j;
        }
    }
    i
}

fn name(s: &str) -> (TokenKind, usize) {
    let mut end = 0;
    if s.starts_with(|c: char| is_pn_chars_base(c)) {
        end = char_len_at(s, 0);
        end = scan_with_inner_dots(s, end, is_pn_chars);
    }
    if s[end..].starts_with(':') {
        end += 1;
        return (TokenKind::PName, local_part(s, end));
    }
    // no colon: a bare word. Keep it to name characters without dots so that
    // `word.` leaves the dot as punctuation.
    let word_end = s
        .find(|c: char| !(is_pn_chars(c)))
        .unwrap_or(s.len());
    let word = &s[..word_end];
    if word == "a" {
        return (TokenKind::AKeyword, 1);
    }
    for (first, second) in [("ORDER", "BY"), ("GROUP", "BY"), ("FROM", "NAMED")] {
        if word.eq_ignore_ascii_case(first) {
            if let Some(len) = compound(s, word_end, second) {
                return (TokenKind::Keyword, len);
            }
        }
    }
    (TokenKind::Keyword, word_end)
}

fn compound(s: &str, word_end: usize, second: &str) -> Option<usize> {
    let rest = &s[word_end..];
    let ws = rest.find(|c: char| !c.is_whitespace())?;
    if ws == 0 {
        return None;
    }
    let after = &rest[ws..];
    let next_end = after.find(|c: char| !is_pn_chars(c)).unwrap_or(after.len());
    if after[..next_end].eq_ignore_ascii_case(second) && !after[next_end..].starts_with(':') {
        Some(word_end + ws + next_end)
    } else {
        None
    }
}

fn local_part(s: &str, mut end: usize) -> usize {
    let ok = |c: char| is_pn_chars(c) || c == ':' || c == '%' || c == '\\';
    let first_ok = |c: char| is_pn_chars_u(c) || c == ':' || c.is_ascii_digit() || c == '%' || c == '\\';
    let Some(c) = s[end..].chars().next() else {
        return end;
    };
    if !first_ok(c) {
        return end;
    }
    loop {
        let Some(c) = s[end..].chars().next() else {
            return end;
        };
        if c == '\\' {
            end += 1;
            if let Some(e) = s[end..].chars().next() {
                end += e.len_utf8();
            }
        } else if ok(c) {
            end += c.len_utf8();
        } else if c == '.' {
            let after = s[end..].trim_start_matches('.');
            if after.starts_with(ok) {
                end = s.len() - after.len();
            } else {
                return end;
            }
        } else {
            return end;
        }
    }
}
