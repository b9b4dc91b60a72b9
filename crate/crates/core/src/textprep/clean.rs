//! Markup and noise removal for ingested text.

use unicode_normalization::UnicodeNormalization;

use super::{detect_language, TextError};
use crate::corpus::Document;

/// Elements dropped together with everything inside them: images and their
/// captions, scripts, and page metadata.
const DROPPED_ELEMENTS: &[&str] = &[
    "script", "style", "noscript", "head", "title", "figure", "figcaption", "picture", "svg", "video",
    "audio", "iframe", "canvas", "template",
];

/// Elements that imply a line break.
const BLOCK_ELEMENTS: &[&str] = &[
    "p", "div", "br", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "tr", "td", "th", "table",
    "section", "article", "header", "footer", "blockquote", "hr", "pre", "aside", "nav", "main",
];

/// Plain-text lines starting with one of these are treated as image captions.
const CAPTION_PREFIXES: &[&str] = &["photo:", "image:", "picture:", "file photo:", "ছবি:", "ছবি :"];

/// Upper bound on clean passes; each pass that changes the text shortens it.
const MAX_PASSES: usize = 16;

/// Cleans `raw` into plain text: strips markup, image elements with their
/// captions, control characters, a repeated `title`, collapses whitespace
/// within lines and NFC-normalizes. Line breaks are kept, one per line of
/// content.
///
/// Runs single passes until the text stops changing, so entity-encoded
/// markup cannot survive and the function is idempotent.
pub fn clean_text(raw: &str, title: Option<&str>) -> Result<String, TextError> {
    let title = title.map(|t| collapse_line(&nfc(&decode_entities(&strip_markup(t))))).filter(|t| !t.is_empty());
    let mut current = raw.to_string();
    for _ in 0..MAX_PASSES {
        let next = clean_pass(&current, title.as_deref());
        if next == current {
            break;
        }
        current = next;
    }
    if current.is_empty() {
        Err(TextError::EmptyAfterClean)
    } else {
        Ok(current)
    }
}

/// Sets `cleaned_text` and `lang` from the document's raw text.
pub fn clean_document(document: &Document) -> Result<Document, TextError> {
    let cleaned = clean_text(&document.raw_text, document.title.as_deref())?;
    let mut out = document.clone();
    out.lang = Some(detect_language(&cleaned));
    out.cleaned_text = Some(cleaned);
    Ok(out)
}

fn clean_pass(text: &str, title: Option<&str>) -> String {
    let text = nfc(&decode_entities(&strip_markup(text)));
    let mut lines: Vec<String> = text
        .split(['\n', '\r'])
        .map(collapse_line)
        .filter(|line| !line.is_empty() && !is_caption(line))
        .collect();

    if let Some(title) = title {
        lines.retain(|line| line != title);
        if let Some(first) = lines.first_mut() {
            if let Some(rest) = first.strip_prefix(title) {
                if rest.starts_with(' ') {
                    *first = rest.trim_start().to_string();
                }
            }
        }
        lines.retain(|line| !line.is_empty());
    }
    lines.join("\n")
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn is_caption(line: &str) -> bool {
    let lower = line.to_lowercase();
    CAPTION_PREFIXES.iter().any(|p| lower.starts_with(p))
}

/// Drops control characters and collapses whitespace runs to one space.
fn collapse_line(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut pending_space = false;
    for c in line.chars() {
        if c.is_whitespace() {
            pending_space = true;
        } else if c.is_control() || is_format_noise(c) {
            continue;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
    }
    out
}

// Zero-width joiners (U+200C, U+200D) are meaningful in Bengali and kept.
fn is_format_noise(c: char) -> bool {
    matches!(c, '\u{200B}' | '\u{FEFF}' | '\u{00AD}' | '\u{2060}')
}

fn strip_markup(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let mut rest = input;
    while let Some(pos) = rest.find('<') {
        out.push_str(&rest[..pos]);
        let after = &rest[pos..];
        match parse_tag(after) {
            Some(Tag::Comment(len)) => rest = &after[len..],
            Some(Tag::Element { name, closing, self_closing, len }) => {
                rest = &after[len..];
                if BLOCK_ELEMENTS.contains(&name.as_str()) {
                    out.push('\n');
                }
                if !closing && !self_closing && DROPPED_ELEMENTS.contains(&name.as_str()) {
                    rest = skip_past_close(rest, &name);
                    out.push('\n');
                }
            }
            None => {
                out.push('<');
                rest = &after[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

enum Tag {
    Comment(usize),
    Element { name: String, closing: bool, self_closing: bool, len: usize },
}

/// Parses a tag at the start of `s` (which begins with `<`). Returns `None`
/// when the `<` does not open a well-formed tag.
fn parse_tag(s: &str) -> Option<Tag> {
    let body = &s[1..];
    if let Some(comment) = body.strip_prefix("!--") {
        let end = comment.find("-->")?;
        return Some(Tag::Comment(4 + end + 3));
    }
    let (closing, name_start) = match body.strip_prefix('/') {
        Some(b) => (true, b),
        None => (false, body),
    };
    let first = name_start.chars().next()?;
    if !(first.is_ascii_alphabetic() || first == '!' || first == '?') {
        return None;
    }
    let name: String = name_start
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '!' | '?' | '-' | ':'))
        .collect::<String>()
        .to_ascii_lowercase();

    // Find the closing '>' while respecting quoted attribute values.
    let mut quote: Option<char> = None;
    for (i, c) in s.char_indices().skip(1) {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, '"' | '\'') => quote = Some(c),
            (None, '<') => return None,
            (None, '>') => {
                let self_closing = s[..i].ends_with('/');
                return Some(Tag::Element { name, closing, self_closing, len: i + 1 });
            }
            _ => {}
        }
    }
    None
}

fn skip_past_close<'a>(s: &'a str, name: &str) -> &'a str {
    let lower = s.to_ascii_lowercase();
    let needle = format!("</{name}");
    match lower.find(&needle) {
        Some(start) => match s[start..].find('>') {
            Some(end) => &s[start + end + 1..],
            None => "",
        },
        None => "",
    }
}

fn decode_entities(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let mut rest = input;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        let after = &rest[pos..];
        match decode_one(after) {
            Some((c, len)) => {
                out.push(c);
                rest = &after[len..];
            }
            None => {
                out.push('&');
                rest = &after[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_one(s: &str) -> Option<(char, usize)> {
    let (end, _) = s.char_indices().take(12).find(|&(_, c)| c == ';')?;
    let entity = &s[1..end];
    let c = match entity {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{00A0}',
        "ndash" => '\u{2013}',
        "mdash" => '\u{2014}',
        "lsquo" => '\u{2018}',
        "rsquo" => '\u{2019}',
        "ldquo" => '\u{201C}',
        "rdquo" => '\u{201D}',
        "hellip" => '\u{2026}',
        _ => {
            let num = entity.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse().ok()?,
            };
            char::from_u32(code)?
        }
    };
    Some((c, end + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, DocumentSource};
    use crate::textprep::LanguageTag;
    use proptest::prelude::*;

    #[test]
    fn strips_tags_and_images() {
        let raw = "<p>Agent <b>fraud</b> reported</p><img alt='photo'>";
        assert_eq!(clean_text(raw, None).unwrap(), "Agent fraud reported");
    }

    #[test]
    fn plain_text_is_unchanged() {
        let raw = "Mobile banking fraud reported in Dhaka.";
        assert_eq!(clean_text(raw, None).unwrap(), raw);
    }

    #[test]
    fn only_an_image_is_empty_after_clean() {
        assert_eq!(clean_text("<img src=\"a.jpg\" alt=\"agent\">", None), Err(TextError::EmptyAfterClean));
    }

    #[test]
    fn figure_with_caption_is_dropped() {
        let raw = "<figure><img src=x><figcaption>Agents queue in Dhaka</figcaption></figure><p>Cash-out fees rose.</p>";
        assert_eq!(clean_text(raw, None).unwrap(), "Cash-out fees rose.");
    }

    #[test]
    fn caption_lines_and_scripts_removed() {
        let raw = "Photo: Collected\nএজেন্ট টাকা নিয়ে পালিয়েছে।<script>var x = '<p>';</script>";
        assert_eq!(clean_text(raw, None).unwrap(), "এজেন্ট টাকা নিয়ে পালিয়েছে।");
    }

    #[test]
    fn duplicated_title_removed_from_body() {
        let raw = "<h1>Agent arrested</h1><p>Police arrested an agent.</p>";
        assert_eq!(clean_text(raw, Some("Agent arrested")).unwrap(), "Police arrested an agent.");
        let inline = "Agent arrested Police arrested an agent.";
        assert_eq!(clean_text(inline, Some("Agent arrested")).unwrap(), "Police arrested an agent.");
    }

    #[test]
    fn entities_decoded_and_encoded_markup_removed() {
        assert_eq!(clean_text("Fees &amp; charges", None).unwrap(), "Fees & charges");
        assert_eq!(clean_text("a &lt;b&gt;bold&lt;/b&gt; claim", None).unwrap(), "a bold claim");
        assert_eq!(clean_text("&#2463;&#x995;", None).unwrap(), "টক");
    }

    #[test]
    fn control_characters_and_whitespace_collapse() {
        let raw = "  Agent\u{0007}   fraud \t reported \r\n\n\n second   line  ";
        assert_eq!(clean_text(raw, None).unwrap(), "Agent fraud reported\nsecond line");
    }

    #[test]
    fn lone_angle_brackets_are_text() {
        assert_eq!(clean_text("fees < 5 and > 2", None).unwrap(), "fees < 5 and > 2");
    }

    #[test]
    fn clean_document_sets_text_and_language() {
        let d = Document::new("d", DocumentSource::Manual, "x", "<p>টাকা পাচার হচ্ছে</p>");
        let cleaned = clean_document(&d).unwrap();
        assert_eq!(cleaned.cleaned_text.as_deref(), Some("টাকা পাচার হচ্ছে"));
        assert_eq!(cleaned.lang, Some(LanguageTag::Bangla));
        assert_eq!(cleaned.raw_text, d.raw_text);
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(raw in r#"[a-zA-Z<>/&;#! "'=\n\t\u{0995}-\u{09A8}\u{0964}.]{0,60}"#,
                               title in proptest::option::of("[a-zA-Z ]{0,8}")) {
            if let Ok(once) = clean_text(&raw, title.as_deref()) {
                let twice = clean_text(&once, title.as_deref()).unwrap();
                prop_assert_eq!(&twice, &once);
                prop_assert!(parse_tag_anywhere(&once).is_none());
            }
        }

        #[test]
        fn tagged_input_is_idempotent(words in prop::collection::vec("[a-z]{1,6}", 1..6),
                                      tags in prop::collection::vec(prop::sample::select(vec!["b", "i", "p", "img", "span", "br"]), 1..6)) {
            let mut raw = String::new();
            for (w, t) in words.iter().zip(tags.iter().cycle()) {
                raw.push_str(&format!("<{t}>{w}</{t}> "));
            }
            if let Ok(once) = clean_text(&raw, None) {
                prop_assert_eq!(clean_text(&once, None).unwrap(), once);
            }
        }
    }

    fn parse_tag_anywhere(s: &str) -> Option<()> {
        s.match_indices('<').find_map(|(i, _)| parse_tag(&s[i..]).map(|_| ()))
    }
}
