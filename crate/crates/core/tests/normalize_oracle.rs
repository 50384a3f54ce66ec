mod common;

use common::normalize_oracle;
use proptest::prelude::*;
use sparql_assist_core::normalize_label;

#[test]
fn reference_examples() {
    for (input, want) in [("Title", "title"), ("Café", "cafe"), ("Größe", "grosse")] {
        assert_eq!(normalize_label(input), want);
        assert_eq!(normalize_oracle(input), want);
    }
}

// Scripts whose characters have been stable across Unicode versions, so the
// two implementations share the same data.
fn text() -> impl Strategy<Value = String> {
    let ranges = prop_oneof![
        proptest::char::range('\u{20}', '\u{7E}'),
        proptest::char::range('\u{A0}', '\u{24F}'),
        proptest::char::range('\u{300}', '\u{36F}'),
        proptest::char::range('\u{370}', '\u{3FF}'),
        proptest::char::range('\u{400}', '\u{4FF}'),
        proptest::char::range('\u{1E00}', '\u{1FFF}'),
        proptest::char::range('\u{FB00}', '\u{FB06}'),
        proptest::char::range('\u{2160}', '\u{217F}'),
        Just('\t'),
        Just('\n'),
    ];
    proptest::collection::vec(ranges, 0..24).prop_map(|cs| cs.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn agrees_with_reference(s in text()) {
        prop_assert_eq!(normalize_label(&s), normalize_oracle(&s));
    }

    #[test]
    fn idempotent(s in any::<String>()) {
        let once = normalize_label(&s);
        prop_assert_eq!(normalize_label(&once), once.clone());
    }

    #[test]
    fn output_is_trimmed_and_collapsed(s in any::<String>()) {
        let out = normalize_label(&s);
        prop_assert_eq!(out.trim(), out.as_str());
        prop_assert!(!out.contains("  "));
    }
}
