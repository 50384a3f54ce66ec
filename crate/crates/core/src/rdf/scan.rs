// Low-level scanner shared by the N-Triples and Turtle readers.

use alloc::format;
use alloc::string::String;

use crate::chars::{is_iri_char, is_pn_chars, is_pn_chars_base, is_pn_chars_u};

pub(super) struct Scanner<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

pub(super) struct ScanError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

pub(super) type ScanResult<T> = Result<T, ScanError>;

impl<'a> Scanner<'a> {
    pub fn new(src: &'a str, line: usize) -> Self {
        Scanner {
            src,
            pos: 0,
            line,
            col: 1,
        }
    }

    pub fn line(&self) -> usize {
        self.line
    }

    pub fn column(&self) -> usize {
        self.col
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn starts_with(&self, s: &str) -> bool {
        self.rest().starts_with(s)
    }

    pub fn starts_with_keyword_ci(&self, kw: &str) -> bool {
        let rest = self.rest();
        rest.len() >= kw.len()
            && rest.is_char_boundary(kw.len())
            && rest[..kw.len()].eq_ignore_ascii_case(kw)
            && !rest[kw.len()..]
                .chars()
                .next()
                .is_some_and(|c| is_pn_chars(c) || c == ':')
    }

    pub fn advance_by(&mut self, n_bytes: usize) {
        let target = self.pos + n_bytes;
        while self.pos < target {
            self.bump();
        }
    }

    pub fn err<T>(&self, message: impl Into<String>) -> ScanResult<T> {
        Err(ScanError {
            line: self.line,
            column: self.col,
            message: message.into(),
        })
    }

    pub fn skip_ws_and_comments(&mut self) {
        loop {
            match self.peek() {
                Some(c) if matches!(c, ' ' | '\t' | '\r' | '\n') => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' || c == '\r' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    /// `<...>` with `\u` escapes; returns the unescaped content.
    pub fn iriref(&mut self) -> ScanResult<String> {
        if !self.eat('<') {
            return self.err("expected '<'");
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.err("unterminated IRI"),
                Some('>') => return Ok(out),
                Some('\\') => {
                    let c = self.uchar_after_backslash()?;
                    out.push(c);
                }
                Some(c) if is_iri_char(c) => out.push(c),
                Some(c) => return self.err(format!("invalid character {c:?} in IRI")),
            }
        }
    }

    fn uchar_after_backslash(&mut self) -> ScanResult<char> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return self.err("invalid escape in IRI"),
        };
        self.hex_char(len)
    }

    fn hex_char(&mut self, len: usize) -> ScanResult<char> {
        let mut value: u32 = 0;
        for _ in 0..len {
            let Some(d) = self.bump().and_then(|c| c.to_digit(16)) else {
                return self.err("invalid hex escape");
            };
            value = value * 16 + d;
        }
        match char::from_u32(value) {
            Some(c) => Ok(c),
            None => self.err(format!("escape U+{value:X} is not a scalar value")),
        }
    }

    /// A quoted string starting at the current position. Supports `"`, `'`
    /// and (when `allow_long`) the triple-quoted forms.
    pub fn string(&mut self, allow_long: bool) -> ScanResult<String> {
        let quote = match self.peek() {
            Some(q @ ('"' | '\'')) => q,
            _ => return self.err("expected string"),
        };
        let long = allow_long && {
            let mut it = self.rest().chars();
            it.next() == Some(quote) && it.next() == Some(quote) && it.next() == Some(quote)
        };
        let mut out = String::new();
        if long {
            self.advance_by(3);
            loop {
                if self.rest().starts_with(quote) {
                    let mut it = self.rest().chars();
                    if it.next() == Some(quote) && it.next() == Some(quote) && it.next() == Some(quote) {
                        // A long string may end with up to two extra quotes: """a""""" is a"".
                        let mut extra = 0;
                        while self.rest()[3..].starts_with(quote) && extra < 2 {
                            out.push(quote);
                            self.bump();
                            extra += 1;
                        }
                        self.advance_by(3);
                        return Ok(out);
                    }
                }
                match self.bump() {
                    None => return self.err("unterminated long string"),
                    Some('\\') => out.push(self.echar()?),
                    Some(c) => out.push(c),
                }
            }
        }
        self.bump();
        loop {
            match self.bump() {
                None => return self.err("unterminated string"),
                Some(c) if c == quote => return Ok(out),
                Some('\n' | '\r') => return self.err("line break in string"),
                Some('\\') => out.push(self.echar()?),
                Some(c) => out.push(c),
            }
        }
    }

    fn echar(&mut self) -> ScanResult<char> {
        match self.bump() {
            Some('t') => Ok('\t'),
            Some('b') => Ok('\u{8}'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('f') => Ok('\u{c}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some('u') => self.hex_char(4),
            Some('U') => self.hex_char(8),
            _ => self.err("invalid escape sequence in string"),
        }
    }

    /// `@tag` after a string; returns the tag without `@`.
    pub fn langtag(&mut self) -> ScanResult<&'a str> {
        if !self.eat('@') {
            return self.err("expected '@'");
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '-') {
            self.bump();
        }
        if self.pos == start {
            return self.err("empty language tag");
        }
        Ok(&self.src[start..self.pos])
    }

    /// `_:label`
    pub fn blank_label(&mut self) -> ScanResult<String> {
        if !(self.eat('_') && self.eat(':')) {
            return self.err("expected '_:'");
        }
        let start = self.pos;
        match self.peek() {
            Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => {
                self.bump();
            }
            _ => return self.err("invalid blank node label"),
        }
        while let Some(c) = self.peek() {
            if is_pn_chars(c) {
                self.bump();
            } else if c == '.' && self.peek_nth(1).is_some_and(|n| is_pn_chars(n) || n == '.') {
                self.bump();
            } else {
                break;
            }
        }
        Ok(String::from(&self.src[start..self.pos]))
    }

    /// `prefix:local`; returns (prefix, unescaped local).
    pub fn pname(&mut self) -> ScanResult<(&'a str, String)> {
        let start = self.pos;
        if let Some(c) = self.peek() {
            if is_pn_chars_base(c) {
                self.bump();
                while let Some(c) = self.peek() {
                    if is_pn_chars(c) {
                        self.bump();
                    } else if c == '.' && self.peek_nth(1).is_some_and(|n| is_pn_chars(n) || n == '.') {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
        }
        let prefix = &self.src[start..self.pos];
        if !self.eat(':') {
            return self.err("expected prefixed name");
        }
        let mut local = String::new();
        let mut first = true;
        loop {
            let Some(c) = self.peek() else { break };
            let ok_here = if first {
                is_pn_chars_u(c) || c == ':' || c.is_ascii_digit() || c == '%' || c == '\\'
            } else {
                is_pn_chars(c) || c == ':' || c == '%' || c == '\\' || c == '.'
            };
            if !ok_here {
                break;
            }
            if c == '.' {
                // a trailing dot ends the statement
                let continues = self.rest()[1..]
                    .trim_start_matches('.')
                    .starts_with(|n: char| is_pn_chars(n) || n == ':' || n == '%' || n == '\\');
                if !continues {
                    break;
                }
            }
            self.bump();
            match c {
                '%' => {
                    let (Some(a), Some(b)) = (self.bump(), self.bump()) else {
                        return self.err("truncated percent escape");
                    };
                    if !(a.is_ascii_hexdigit() && b.is_ascii_hexdigit()) {
                        return self.err("invalid percent escape");
                    }
                    local.push('%');
                    local.push(a);
                    local.push(b);
                }
                '\\' => match self.bump() {
                    Some(e) if "_~.-!$&'()*+,;=/?#@%".contains(e) => local.push(e),
                    _ => return self.err("invalid local name escape"),
                },
                c => local.push(c),
            }
            first = false;
        }
        Ok((prefix, local))
    }
}
