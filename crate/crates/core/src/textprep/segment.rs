use super::detect_language;
use crate::corpus::{Document, Fragment};

const DANDA: char = '\u{0964}';

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | DANDA)
}

/// Closing punctuation that stays with the sentence it ends.
fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201D}' | '\u{2019}' | '»')
}

/// Splits text into trimmed, non-empty sentence fragments.
///
/// Breaks after `.`, `!`, `?` and the danda, and at every newline. Runs of
/// terminators and any closing quotes or brackets right after them stay
/// attached to the fragment they end. Abbreviations are not special-cased.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let end = if c == '\n' {
            let piece = &text[start..i];
            start = i + 1;
            piece
        } else if is_terminator(c) {
            let mut end = i + c.len_utf8();
            while let Some(&(j, next)) = chars.peek() {
                if is_terminator(next) || is_closer(next) {
                    end = j + next.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let piece = &text[start..end];
            start = end;
            piece
        } else {
            continue;
        };
        push_trimmed(&mut out, end);
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn push_trimmed<'a>(out: &mut Vec<&'a str>, piece: &'a str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece);
    }
}

/// Cuts a document's cleaned text (raw text if it was never cleaned) into
/// fragments with ids `"{doc_id}#{index}"` and a per-fragment language.
pub fn segment_fragments(document: &Document) -> Vec<Fragment> {
    split_sentences(document.best_text())
        .into_iter()
        .enumerate()
        .map(|(index, text)| Fragment {
            id: Fragment::make_id(&document.id, index),
            doc_id: document.id.clone(),
            index,
            text: text.to_string(),
            lang: detect_language(text),
            label: None,
            predicted: None,
        })
        .collect()
}
