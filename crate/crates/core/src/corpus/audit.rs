use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::label::SentimentLabel;

/// One line of the label audit log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEvent {
    pub fragment_id: String,
    pub old: Option<SentimentLabel>,
    pub new: SentimentLabel,
    pub annotator: String,
    pub at: DateTime<Utc>,
}

/// Appends events to a line-delimited audit log, creating it if needed.
/// Existing lines are never rewritten.
pub fn append_label_events(path: &Path, events: &[LabelEvent]) -> Result<(), CorpusError> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CorpusError::io(path, e))?;
    let mut buf = Vec::new();
    for event in events {
        serde_json::to_writer(&mut buf, event).expect("label events always serialize");
        buf.push(b'\n');
    }
    file.write_all(&buf).map_err(|e| CorpusError::io(path, e))?;
    file.sync_data().map_err(|e| CorpusError::io(path, e))
}

/// Reads an audit log. A missing file is an empty log.
pub fn load_label_events(path: &Path) -> Result<Vec<LabelEvent>, CorpusError> {
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CorpusError::io(path, e)),
    };
    let mut events = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line)
            .map_err(|e| CorpusError::Malformed { line: n + 1, message: e.to_string() })?;
        events.push(event);
    }
    Ok(events)
}
