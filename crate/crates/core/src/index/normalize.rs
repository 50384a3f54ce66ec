use alloc::string::String;

use icu_casemap::CaseMapper;
use icu_normalizer::DecomposingNormalizer;
use icu_properties::props::{GeneralCategory, GeneralCategoryGroup};
use icu_properties::CodePointMapData;

/// Search key for a label: NFKD, combining marks removed, full case fold,
/// whitespace runs collapsed to one space, trimmed.
pub fn normalize_label(s: &str) -> String {
    // Case folding can produce characters that decompose further (and the
    // reverse), so run the pipeline until it stops changing.
    let mut current = pass(s);
    for _ in 0..3 {
        let next = pass(&current);
        if next == current {
            break;
        }
        current = next;
    }
    collapse_whitespace(&current)
}

fn pass(s: &str) -> String {
    let decomposed = DecomposingNormalizer::new_nfkd().normalize(s);
    let categories = CodePointMapData::<GeneralCategory>::new();
    let stripped: String = decomposed
        .chars()
        .filter(|&c| !GeneralCategoryGroup::Mark.contains(categories.get(c)))
        .collect();
    CaseMapper::new().fold_string(&stripped).into_owned()
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::normalize_label;

    #[test]
    fn examples() {
        assert_eq!(normalize_label("Title"), "title");
        assert_eq!(normalize_label("Café"), "cafe");
        assert_eq!(normalize_label("Größe"), "grosse");
        assert_eq!(normalize_label("  has \t\n  part "), "has part");
        assert_eq!(normalize_label("ﬁle"), "file");
        assert_eq!(normalize_label(""), "");
    }

    #[test]
    fn idempotent_on_tricky_input() {
        for s in ["ẞ", "İstanbul", "ǅ", "ᾼ", "Ω", "\u{0345}", "ﬀ", "㎒"] {
            let once = normalize_label(s);
            assert_eq!(normalize_label(&once), once, "{s}");
        }
    }
}
