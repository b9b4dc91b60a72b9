use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{LanguageTag, TextError};

/// Ordered tokens; none is empty or contains whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

fn is_token_char(c: char) -> bool {
    if c.is_alphanumeric() {
        return true;
    }
    // Bengali vowel signs, virama and other combining marks are not
    // alphanumeric but belong to the word. Currency and punctuation signs in
    // the block are separators.
    (('\u{0980}'..='\u{09FF}').contains(&c) && !matches!(c, '\u{09F2}' | '\u{09F3}' | '\u{09FA}' | '\u{09FB}' | '\u{09FD}'))
        || matches!(c, '\u{200C}' | '\u{200D}')
}

/// Whitespace-and-punctuation tokenizer with an optional per-language
/// stopword list. The default tokenizer has no stopwords.
#[derive(Debug, Clone, Default)]
pub struct Tokenizer {
    stopwords: HashMap<LanguageTag, HashSet<String>>,
}

impl Tokenizer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stopwords are matched after lowercasing.
    pub fn with_stopwords<I, S>(mut self, lang: LanguageTag, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords
            .entry(lang)
            .or_default()
            .extend(words.into_iter().map(|w| w.as_ref().to_lowercase()));
        self
    }

    pub fn tokenize(&self, text: &str, lang: LanguageTag) -> Result<TokenSequence, TextError> {
        if text.trim().is_empty() {
            return Err(TextError::EmptyInput);
        }
        let stop = self.stopwords.get(&lang);
        let tokens = text
            .split(|c: char| !is_token_char(c))
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .filter(|t| stop.is_none_or(|s| !s.contains(t)))
            .collect();
        Ok(TokenSequence(tokens))
    }
}

pub fn tokenize(text: &str, lang: LanguageTag) -> Result<TokenSequence, TextError> {
    Tokenizer::default().tokenize(text, lang)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(text: &str, lang: LanguageTag) -> Vec<String> {
        tokenize(text, lang).unwrap().into_inner()
    }

    #[test]
    fn latin_lowercased_and_punctuation_dropped() {
        assert_eq!(toks("bKash Agent FRAUD!", LanguageTag::English), vec!["bkash", "agent", "fraud"]);
    }

    #[test]
    fn bengali_kept_as_is_without_danda_or_comma() {
        assert_eq!(toks("টাকা, পাচার।", LanguageTag::Bangla), vec!["টাকা", "পাচার"]);
        // Virama and vowel signs stay inside the word.
        assert_eq!(toks("এজেন্ট ক্যাশআউট", LanguageTag::Bangla), vec!["এজেন্ট", "ক্যাশআউট"]);
    }

    #[test]
    fn digits_are_tokens() {
        assert_eq!(toks("Tk 5000 ৳৫০০", LanguageTag::Mixed), vec!["tk", "5000", "৫০০"]);
    }

    #[test]
    fn blank_input_violates_precondition() {
        assert_eq!(tokenize(" ", LanguageTag::English), Err(TextError::EmptyInput));
        assert_eq!(tokenize("", LanguageTag::English), Err(TextError::EmptyInput));
    }

    #[test]
    fn punctuation_only_gives_no_tokens() {
        assert!(tokenize("?!", LanguageTag::Unknown).unwrap().is_empty());
    }

    #[test]
    fn stopword_hook_filters_per_language() {
        let t = Tokenizer::new().with_stopwords(LanguageTag::English, ["The"]);
        assert_eq!(t.tokenize("the agent", LanguageTag::English).unwrap().into_inner(), vec!["agent"]);
        assert_eq!(t.tokenize("the agent", LanguageTag::Mixed).unwrap().into_inner(), vec!["the", "agent"]);
    }

    proptest! {
        #[test]
        fn tokens_nonempty_without_whitespace(text in "\\PC{1,60}") {
            prop_assume!(!text.trim().is_empty());
            let seq = tokenize(&text, LanguageTag::Mixed).unwrap();
            prop_assert!(seq.iter().all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)));
            prop_assert!(seq.len() <= text.chars().count());
        }
    }
}
