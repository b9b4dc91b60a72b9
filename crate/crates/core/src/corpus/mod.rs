//! Documents, fragments, labels and dataset splits.
//!
//! A [`Corpus`] holds every ingested [`Document`] and the sentence-level
//! [`Fragment`]s cut from them. Fragments are the unit of labeling and
//! classification. Relabeling goes through [`Corpus::apply_label`], which
//! appends to an audit trail that is never rewritten.

mod audit;
mod split;
mod store;

use std::collections::{HashMap, HashSet};
use std::ops::Add;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::classify::Prediction;
use crate::label::{PerClass, SentimentLabel};
use crate::textprep::LanguageTag;

pub use audit::{append_label_events, load_label_events, LabelEvent};
pub use split::{allocate_test_sizes, round_half_up, stratified_split, DatasetSplit, SplitError};
pub use store::{load_corpus, save_corpus};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("fragment `{fragment}` refers to unknown document `{doc_id}`")]
    UnknownDocument { fragment: String, doc_id: String },
    #[error("document `{doc_id}` has two fragments at index {index}")]
    DuplicateIndex { doc_id: String, index: usize },
    #[error("record `{id}` violates an invariant: {reason}")]
    Invalid { id: String, reason: String },
    #[error("fragment `{0}` not found")]
    NotFound(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CorpusError::Io { path: path.display().to_string(), source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentSource {
    NewsFeed,
    SocialExport,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub source: DocumentSource,
    /// Feed item link, export path or other pointer back to the original.
    pub origin_ref: String,
    pub fetched_at: DateTime<Utc>,
    /// Publication time reported by the source, when it has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_at: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub raw_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cleaned_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<LanguageTag>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        source: DocumentSource,
        origin_ref: impl Into<String>,
        raw_text: impl Into<String>,
    ) -> Self {
        Document {
            id: id.into(),
            source,
            origin_ref: origin_ref.into(),
            fetched_at: Utc::now(),
            published_at: None,
            title: None,
            raw_text: raw_text.into(),
            cleaned_text: None,
            lang: None,
        }
    }

    /// Cleaned text when available, raw text otherwise.
    pub fn best_text(&self) -> &str {
        self.cleaned_text.as_deref().unwrap_or(&self.raw_text)
    }

    pub(crate) fn validate(&self) -> Result<(), CorpusError> {
        if self.id.is_empty() {
            return Err(invalid(&self.id, "empty id"));
        }
        if self.raw_text.is_empty() {
            return Err(invalid(&self.id, "raw_text is empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    pub id: String,
    pub doc_id: String,
    /// 0-based position within the parent document.
    pub index: usize,
    pub text: String,
    pub lang: LanguageTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<SentimentLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Prediction>,
}

impl Fragment {
    /// Canonical fragment id for the `index`-th fragment of a document.
    pub fn make_id(doc_id: &str, index: usize) -> String {
        format!("{doc_id}#{index}")
    }

    pub(crate) fn validate(&self) -> Result<(), CorpusError> {
        if self.id.is_empty() {
            return Err(invalid(&self.id, "empty id"));
        }
        if self.text.trim().is_empty() {
            return Err(invalid(&self.id, "text is empty after trimming"));
        }
        Ok(())
    }
}

fn invalid(id: &str, reason: &str) -> CorpusError {
    CorpusError::Invalid { id: id.to_string(), reason: reason.to_string() }
}

/// Per-class label counts over a set of fragments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub counts: PerClass<u64>,
    /// Sum of `counts`; unlabeled fragments are not included.
    pub total: u64,
    pub unlabeled: u64,
}

impl ClassDistribution {
    pub fn count(&self, label: SentimentLabel) -> u64 {
        self.counts[label]
    }
}

impl Add for ClassDistribution {
    type Output = ClassDistribution;

    fn add(self, rhs: Self) -> Self {
        ClassDistribution {
            counts: PerClass::from_fn(|l| self.counts[l] + rhs.counts[l]),
            total: self.total + rhs.total,
            unlabeled: self.unlabeled + rhs.unlabeled,
        }
    }
}

pub fn class_distribution<'a, I>(fragments: I) -> ClassDistribution
where
    I: IntoIterator<Item = &'a Fragment>,
{
    let mut dist = ClassDistribution::default();
    for fragment in fragments {
        match fragment.label {
            Some(label) => {
                dist.counts[label] += 1;
                dist.total += 1;
            }
            None => dist.unlabeled += 1,
        }
    }
    dist
}

/// An in-memory corpus with unique ids and a label audit trail.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    fragments: Vec<Fragment>,
    doc_index: HashMap<String, usize>,
    fragment_index: HashMap<String, usize>,
    positions: HashSet<(String, usize)>,
    audit: Vec<LabelEvent>,
}

impl Corpus {
    /// Builds a corpus, checking id uniqueness, `(doc_id, index)`
    /// uniqueness and that every fragment points at a known document.
    pub fn new(documents: Vec<Document>, fragments: Vec<Fragment>) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::default();
        for document in documents {
            corpus.insert_document(document)?;
        }
        for fragment in fragments {
            corpus.insert_fragment(fragment)?;
        }
        Ok(corpus)
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn audit_trail(&self) -> &[LabelEvent] {
        &self.audit
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.doc_index.get(id).map(|&i| &self.documents[i])
    }

    pub fn fragment(&self, id: &str) -> Option<&Fragment> {
        self.fragment_index.get(id).map(|&i| &self.fragments[i])
    }

    pub fn labeled_fragments(&self) -> impl Iterator<Item = &Fragment> {
        self.fragments.iter().filter(|f| f.label.is_some())
    }

    pub fn into_parts(self) -> (Vec<Document>, Vec<Fragment>) {
        (self.documents, self.fragments)
    }

    pub fn insert_document(&mut self, document: Document) -> Result<(), CorpusError> {
        document.validate()?;
        if self.doc_index.contains_key(&document.id) {
            return Err(CorpusError::DuplicateId(document.id));
        }
        self.doc_index.insert(document.id.clone(), self.documents.len());
        self.documents.push(document);
        Ok(())
    }

    pub fn insert_fragment(&mut self, fragment: Fragment) -> Result<(), CorpusError> {
        fragment.validate()?;
        if self.fragment_index.contains_key(&fragment.id) {
            return Err(CorpusError::DuplicateId(fragment.id));
        }
        if !self.doc_index.contains_key(&fragment.doc_id) {
            return Err(CorpusError::UnknownDocument {
                fragment: fragment.id,
                doc_id: fragment.doc_id,
            });
        }
        if !self.positions.insert((fragment.doc_id.clone(), fragment.index)) {
            return Err(CorpusError::DuplicateIndex { doc_id: fragment.doc_id, index: fragment.index });
        }
        self.fragment_index.insert(fragment.id.clone(), self.fragments.len());
        self.fragments.push(fragment);
        Ok(())
    }

    /// Sets a fragment's label and appends the change to the audit trail.
    pub fn apply_label(
        &mut self,
        fragment_id: &str,
        label: SentimentLabel,
        annotator: &str,
        at: DateTime<Utc>,
    ) -> Result<&Fragment, CorpusError> {
        let &i = self
            .fragment_index
            .get(fragment_id)
            .ok_or_else(|| CorpusError::NotFound(fragment_id.to_string()))?;
        let fragment = &mut self.fragments[i];
        self.audit.push(LabelEvent {
            fragment_id: fragment_id.to_string(),
            old: fragment.label,
            new: label,
            annotator: annotator.to_string(),
            at,
        });
        fragment.label = Some(label);
        Ok(&self.fragments[i])
    }

    /// Replays previously persisted label events onto the corpus.
    pub fn replay_labels(&mut self, events: &[LabelEvent]) -> Result<(), CorpusError> {
        for event in events {
            self.apply_label(&event.fragment_id, event.new, &event.annotator, event.at)?;
        }
        Ok(())
    }

    pub fn set_prediction(&mut self, fragment_id: &str, prediction: Prediction) -> Result<(), CorpusError> {
        let &i = self
            .fragment_index
            .get(fragment_id)
            .ok_or_else(|| CorpusError::NotFound(fragment_id.to_string()))?;
        self.fragments[i].predicted = Some(prediction);
        Ok(())
    }

    pub fn class_distribution(&self) -> ClassDistribution {
        class_distribution(&self.fragments)
    }

    /// Ids of documents that have at least one fragment.
    pub fn segmented_doc_ids(&self) -> HashSet<&str> {
        self.fragments.iter().map(|f| f.doc_id.as_str()).collect()
    }
}
