use std::collections::HashMap;

use unicode_normalization::UnicodeNormalization;

use crate::corpus::Document;

/// NFC-normalized text with whitespace runs collapsed to single spaces.
pub fn dedup_key(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Keeps one document per [`dedup_key`] of its best text: the earliest
/// fetched, or the first in input order on a tie. Survivors keep their
/// relative order.
pub fn deduplicate(documents: Vec<Document>) -> Vec<Document> {
    let mut winner: HashMap<String, usize> = HashMap::new();
    for (i, doc) in documents.iter().enumerate() {
        let key = dedup_key(doc.best_text());
        winner
            .entry(key)
            .and_modify(|w| {
                if doc.fetched_at < documents[*w].fetched_at {
                    *w = i;
                }
            })
            .or_insert(i);
    }
    let mut keep = vec![false; documents.len()];
    for &i in winner.values() {
        keep[i] = true;
    }
    documents.into_iter().zip(keep).filter_map(|(d, k)| k.then_some(d)).collect()
}
