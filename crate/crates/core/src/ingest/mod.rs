//! Acquisition of raw documents from news feeds and social-media exports.
//!
//! Both sources return an [`IngestBatch`]; nothing touches the corpus until a
//! caller commits the batch. Text is stored as fetched; cleaning happens in
//! [`crate::textprep`].

mod dedup;
mod feed;
mod social;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Document, DocumentSource};

pub use dedup::{dedup_key, deduplicate};
pub use feed::{fetch_news_feed, fetch_news_feed_with, parse_feed};
pub use social::{parse_social_export, parse_social_str};

/// Example include list for mobile-financial-services screening. Not applied
/// unless copied into [`SourceConfig::include_keywords`].
pub const DEFAULT_MFS_KEYWORDS: &[&str] = &[
    "bkash", "nagad", "rocket", "upay", "mobile banking", "mobile financial", "agent", "fraud", "scam",
    "money laundering", "hundi", "বিকাশ", "নগদ", "রকেট", "মোবাইল ব্যাংকিং", "প্রতারণা", "প্রতারক", "অর্থ পাচার",
    "হুন্ডি", "এজেন্ট",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    NewsFeed,
    SocialExport,
}

impl std::str::FromStr for SourceKind {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "news_feed" => Ok(SourceKind::NewsFeed),
            "social_export" => Ok(SourceKind::SocialExport),
            other => Err(IngestError::Config(format!("unknown source kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub kind: SourceKind,
    /// `http(s)://` or `file://` URL for feeds, file path for exports.
    pub location: String,
    #[serde(default, with = "opt_secs", skip_serializing_if = "Option::is_none")]
    pub fetch_interval: Option<Duration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_items: Option<usize>,
    /// Export field holding the post text.
    #[serde(default = "default_text_field")]
    pub text_field: String,
    /// Export field holding the post time (RFC 3339 or Unix seconds).
    #[serde(default = "default_timestamp_field")]
    pub timestamp_field: String,
    /// Export field holding a stable post id.
    #[serde(default = "default_id_field")]
    pub id_field: String,
    /// Keep only items mentioning one of these (case-insensitive). Empty keeps all.
    #[serde(default)]
    pub include_keywords: Vec<String>,
}

fn default_text_field() -> String {
    "text".into()
}

fn default_timestamp_field() -> String {
    "created_time".into()
}

fn default_id_field() -> String {
    "id".into()
}

mod opt_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(d) => s.serialize_u64(d.as_secs()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.map(Duration::from_secs))
    }
}

impl SourceConfig {
    pub fn new(kind: SourceKind, location: impl Into<String>) -> Self {
        SourceConfig {
            kind,
            location: location.into(),
            fetch_interval: None,
            max_items: None,
            text_field: default_text_field(),
            timestamp_field: default_timestamp_field(),
            id_field: default_id_field(),
            include_keywords: Vec::new(),
        }
    }

    pub fn news_feed(location: impl Into<String>) -> Self {
        Self::new(SourceKind::NewsFeed, location)
    }

    pub fn social_export(location: impl Into<String>) -> Self {
        Self::new(SourceKind::SocialExport, location)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.max_items == Some(0) {
            return Err(IngestError::Config("max_items must be positive".into()));
        }
        let is_url = ["http://", "https://", "file://"].iter().any(|p| self.location.starts_with(p));
        match self.kind {
            SourceKind::NewsFeed if !is_url => Err(IngestError::Config(format!(
                "news feed location `{}` must be an http(s):// or file:// URL",
                self.location
            ))),
            SourceKind::SocialExport if self.location.starts_with("http://") || self.location.starts_with("https://") => {
                Err(IngestError::Config(format!("social export location `{}` must be a file path", self.location)))
            }
            _ => Ok(()),
        }
    }

    /// Local path for `file://` URLs and plain paths.
    pub(crate) fn local_path(&self) -> Option<PathBuf> {
        if let Some(rest) = self.location.strip_prefix("file://") {
            Some(PathBuf::from(rest))
        } else if self.location.contains("://") {
            None
        } else {
            Some(PathBuf::from(&self.location))
        }
    }

    pub(crate) fn matches_keywords(&self, text: &str) -> bool {
        if self.include_keywords.is_empty() {
            return true;
        }
        let haystack = text.to_lowercase();
        self.include_keywords.iter().any(|k| haystack.contains(&k.to_lowercase()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("invalid source configuration: {0}")]
    Config(String),
    #[error("fetching {url} failed after {attempts} attempt(s): {message}")]
    Fetch { url: String, attempts: u32, message: String },
    #[error("malformed feed at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },
    #[error("export line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("export file {0} is empty")]
    EmptyExport(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    /// Worth retrying later: the source was unreachable rather than malformed.
    pub fn is_retryable(&self) -> bool {
        matches!(self, IngestError::Fetch { .. })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestBatch {
    pub documents: Vec<Document>,
    /// Items dropped for empty or missing text.
    pub skipped: usize,
    /// Items dropped by the keyword filter.
    pub filtered: usize,
    pub warnings: Vec<String>,
}

impl IngestBatch {
    /// Applies keyword filtering, per-batch id uniqueness and `max_items`.
    pub(crate) fn push(&mut self, config: &SourceConfig, document: Document) {
        if self.documents.iter().any(|d| d.id == document.id) {
            self.skipped += 1;
            self.warnings.push(format!("duplicate item id `{}` dropped", document.id));
            return;
        }
        let haystack = format!("{} {}", document.title.as_deref().unwrap_or(""), document.raw_text);
        if !config.matches_keywords(&haystack) {
            self.filtered += 1;
            return;
        }
        if config.max_items.is_some_and(|m| self.documents.len() >= m) {
            return;
        }
        self.documents.push(document);
    }
}

/// `{prefix}-` followed by 16 hex digits of a SHA-256 over the parts.
pub fn hashed_id(prefix: &str, parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    format!("{prefix}-{}", &hex::encode(digest)[..16])
}

pub(crate) fn new_document(
    id: String,
    source: DocumentSource,
    origin_ref: String,
    raw_text: String,
    fetched_at: chrono::DateTime<chrono::Utc>,
) -> Document {
    let mut document = Document::new(id, source, origin_ref, raw_text);
    document.fetched_at = fetched_at;
    document
}
