//! Text cleaning, language detection, sentence segmentation and
//! tokenization for English, Bangla and code-mixed text.

mod clean;
mod lang;
mod segment;
mod tokenize;

pub use clean::{clean_document, clean_text};
pub use lang::{detect_language, LanguageTag};
pub use segment::{segment_fragments, split_sentences};
pub use tokenize::{tokenize, TokenSequence, Tokenizer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TextError {
    #[error("document is empty after cleaning")]
    EmptyAfterClean,
    #[error("text is empty or whitespace only")]
    EmptyInput,
}
