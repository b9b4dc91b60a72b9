//! Line-delimited JSON corpus files.
//!
//! Each line is one record: `{"kind":"doc", ...}` for a [`Document`] or
//! `{"kind":"frag", ...}` for a [`Fragment`]. Text fields are written
//! NFC-normalized.

use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{Corpus, CorpusError, Document, Fragment};
use crate::fsutil::atomic_write;

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum Record {
    #[serde(rename = "doc")]
    Doc(Document),
    #[serde(rename = "frag")]
    Frag(Fragment),
}

pub fn load_corpus(path: &Path) -> Result<(Vec<Document>, Vec<Fragment>), CorpusError> {
    let file = std::fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut documents = Vec::new();
    let mut fragments = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line)
            .map_err(|e| CorpusError::Malformed { line: n + 1, message: e.to_string() })?;
        match record {
            Record::Doc(d) => documents.push(d),
            Record::Frag(f) => fragments.push(f),
        }
    }
    // Corpus::new performs all id and reference checks.
    Ok(Corpus::new(documents, fragments)?.into_parts())
}

pub fn save_corpus(documents: &[Document], fragments: &[Fragment], path: &Path) -> Result<(), CorpusError> {
    let mut seen = std::collections::HashSet::new();
    for id in documents.iter().map(|d| &d.id) {
        if !seen.insert(("doc", id)) {
            return Err(CorpusError::DuplicateId(id.clone()));
        }
    }
    for id in fragments.iter().map(|f| &f.id) {
        if !seen.insert(("frag", id)) {
            return Err(CorpusError::DuplicateId(id.clone()));
        }
    }

    let mut buf = Vec::new();
    for d in documents {
        write_record(&mut buf, &Record::Doc(nfc_document(d)));
    }
    for f in fragments {
        let mut f = f.clone();
        f.text = nfc(&f.text);
        write_record(&mut buf, &Record::Frag(f));
    }
    atomic_write(path, &buf).map_err(|e| CorpusError::io(path, e))
}

fn write_record(buf: &mut Vec<u8>, record: &Record) {
    serde_json::to_writer(&mut *buf, record).expect("corpus records always serialize");
    buf.push(b'\n');
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn nfc_document(d: &Document) -> Document {
    let mut d = d.clone();
    d.raw_text = nfc(&d.raw_text);
    d.title = d.title.as_deref().map(nfc);
    d.cleaned_text = d.cleaned_text.as_deref().map(nfc);
    d
}
