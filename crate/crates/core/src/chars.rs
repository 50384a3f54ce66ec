// Character classes shared by the Turtle reader and the SPARQL tokenizer.
// Names follow the terminal names of the SPARQL 1.1 / Turtle grammars.

pub(crate) fn is_pn_chars_base(c: char) -> bool {
    matches!(c,
        'A'..='Z'
        | 'a'..='z'
        | '\u{00C0}'..='\u{00D6}'
        | '\u{00D8}'..='\u{00F6}'
        | '\u{00F8}'..='\u{02FF}'
        | '\u{0370}'..='\u{037D}'
        | '\u{037F}'..='\u{1FFF}'
        | '\u{200C}'..='\u{200D}'
        | '\u{2070}'..='\u{218F}'
        | '\u{2C00}'..='\u{2FEF}'
        | '\u{3001}'..='\u{D7FF}'
        | '\u{F900}'..='\u{FDCF}'
        | '\u{FDF0}'..='\u{FFFD}'
        | '\u{10000}'..='\u{EFFFF}')
}

pub(crate) fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_'
}

pub(crate) fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || c == '\u{00B7}'
        || matches!(c, '\u{0300}'..='\u{036F}' | '\u{203F}'..='\u{2040}')
}

/// Characters allowed inside `<...>` apart from escapes.
pub(crate) fn is_iri_char(c: char) -> bool {
    !matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') && c > ' '
}

pub(crate) fn is_varname_char(c: char) -> bool {
    is_pn_chars_u(c)
        || c.is_ascii_digit()
        || c == '\u{00B7}'
        || matches!(c, '\u{0300}'..='\u{036F}' | '\u{203F}'..='\u{2040}')
}

/// Valid `PN_LOCAL` (the part after `prefix:`), used when abbreviating IRIs.
pub(crate) fn is_simple_local(local: &str) -> bool {
    let mut chars = local.chars().peekable();
    match chars.peek() {
        None => return true,
        Some(&c) if is_pn_chars_u(c) || c == ':' || c.is_ascii_digit() => {}
        Some(_) => return false,
    }
    if local.ends_with('.') {
        return false;
    }
    local
        .chars()
        .all(|c| is_pn_chars(c) || c == ':' || c == '.')
}

/// Valid `PN_PREFIX` (possibly empty).
pub(crate) fn is_pn_prefix(prefix: &str) -> bool {
    let mut chars = prefix.chars();
    match chars.next() {
        None => true,
        Some(c) if is_pn_chars_base(c) => {
            !prefix.ends_with('.') && chars.all(|c| is_pn_chars(c) || c == '.')
        }
        Some(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_names() {
        assert!(is_simple_local("SIO_000253"));
        assert!(is_simple_local("title"));
        assert!(is_simple_local("0001"));
        assert!(!is_simple_local("a b"));
        assert!(!is_simple_local("x."));
        assert!(!is_simple_local("-x"));
    }

    #[test]
    fn prefixes() {
        assert!(is_pn_prefix(""));
        assert!(is_pn_prefix("obo-rel"));
        assert!(!is_pn_prefix("_x"));
        assert!(!is_pn_prefix("9a"));
    }
}
