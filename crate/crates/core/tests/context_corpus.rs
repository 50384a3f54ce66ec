mod common;

use common::{context_corpus, corpus_mismatches};

#[test]
fn corpus_matches_hand_derivation() {
    let corpus = context_corpus();
    assert!(corpus.len() >= 30);
    let mut failures = Vec::new();
    for (i, entry) in corpus.iter().enumerate() {
        for m in corpus_mismatches(entry) {
            failures.push(format!("#{i} {:?}: {m}", entry.text));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
