//! Persistent service state.
//!
//! Each entity family has its own append-only JSON-lines log in the data
//! directory. At startup the logs are replayed into memory. Mutations go
//! through one writer: it applies the change to a copy of the current
//! state, appends the events, then publishes the copy. Readers take an
//! `Arc` snapshot and never block on the writer.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use mediascreen_core::classify::ScreenedItem;
use mediascreen_core::corpus::{Corpus, CorpusError, Document, Fragment, LabelEvent};
use mediascreen_core::SentimentLabel;

use crate::error::ServiceError;
use crate::eventlog::EventLog;
use crate::runs::EvalRunRecord;
use crate::triage::{Decision, TriageEvent, TriageItem, TriageQueue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentAdded {
    pub document: Document,
    pub fragments: Vec<Fragment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenRun {
    pub run_id: String,
    pub classifier: String,
    pub at: DateTime<Utc>,
    pub fragment_ids: Vec<String>,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TriageLine {
    Screen(ScreenRun),
    Queue(TriageEvent),
}

#[derive(Debug, Clone, Default)]
pub struct State {
    pub corpus: Corpus,
    pub triage: TriageQueue,
    pub screens: Vec<ScreenRun>,
    pub runs: BTreeMap<String, EvalRunRecord>,
}

struct Logs {
    documents: EventLog,
    labels: EventLog,
    triage: EventLog,
    runs: EventLog,
}

impl Logs {
    fn new(dir: &Path, durable: bool) -> Self {
        let log = |name: &str| EventLog::new(dir.join(format!("{name}.jsonl")), durable);
        Logs { documents: log("documents"), labels: log("labels"), triage: log("triage"), runs: log("runs") }
    }
}

pub struct Store {
    dir: PathBuf,
    logs: Logs,
    writer: Mutex<Arc<State>>,
    snapshot: RwLock<Arc<State>>,
}

fn corrupt(message: impl std::fmt::Display) -> ServiceError {
    ServiceError::Storage(format!("replay failed: {message}"))
}

fn corpus_error(e: CorpusError) -> ServiceError {
    match e {
        CorpusError::NotFound(_) => ServiceError::NotFound(e.to_string()),
        CorpusError::DuplicateId(_) | CorpusError::DuplicateIndex { .. } => {
            ServiceError::Conflict { message: e.to_string(), detail: None }
        }
        CorpusError::Io { .. } => ServiceError::Storage(e.to_string()),
        _ => ServiceError::validation(e.to_string()),
    }
}

impl Store {
    /// Opens (creating if needed) a data directory and replays its logs.
    /// `durable` syncs every append to disk.
    pub fn open(dir: impl Into<PathBuf>, durable: bool) -> Result<Self, ServiceError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| ServiceError::Storage(format!("{}: {e}", dir.display())))?;
        let logs = Logs::new(&dir, durable);
        let mut state = State::default();

        for added in logs.documents.load::<DocumentAdded>().map_err(corrupt)? {
            state.corpus.insert_document(added.document).map_err(corrupt)?;
            for fragment in added.fragments {
                state.corpus.insert_fragment(fragment).map_err(corrupt)?;
            }
        }
        let labels: Vec<LabelEvent> = logs.labels.load().map_err(corrupt)?;
        state.corpus.replay_labels(&labels).map_err(corrupt)?;
        for line in logs.triage.load::<TriageLine>().map_err(corrupt)? {
            match line {
                TriageLine::Screen(run) => state.screens.push(run),
                TriageLine::Queue(event) => {
                    state.triage.apply(&event).map_err(corrupt)?;
                }
            }
        }
        state.triage.check_invariants().map_err(corrupt)?;
        for record in logs.runs.load::<EvalRunRecord>().map_err(corrupt)? {
            record.check_consistency().map_err(corrupt)?;
            if state.runs.insert(record.run_id.clone(), record).is_some() {
                return Err(corrupt("duplicate run id"));
            }
        }

        let state = Arc::new(state);
        Ok(Store { dir, logs, writer: Mutex::new(Arc::clone(&state)), snapshot: RwLock::new(state) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// A consistent view of the state as of the last committed mutation.
    pub fn snapshot(&self) -> Arc<State> {
        Arc::clone(&self.snapshot.read().expect("snapshot lock"))
    }

    fn mutate<R>(&self, f: impl FnOnce(&mut State, &Logs) -> Result<R, ServiceError>) -> Result<R, ServiceError> {
        let mut current = self.writer.lock().expect("writer lock");
        let mut next = State::clone(&current);
        let result = f(&mut next, &self.logs)?;
        let next = Arc::new(next);
        *current = Arc::clone(&next);
        *self.snapshot.write().expect("snapshot lock") = next;
        Ok(result)
    }

    /// Adds documents with their fragments. All or nothing.
    pub fn add_documents(&self, batch: Vec<DocumentAdded>) -> Result<Vec<DocumentAdded>, ServiceError> {
        self.mutate(|state, logs| {
            for added in &batch {
                state.corpus.insert_document(added.document.clone()).map_err(corpus_error)?;
                for fragment in &added.fragments {
                    state.corpus.insert_fragment(fragment.clone()).map_err(corpus_error)?;
                }
            }
            logs.documents.append(&batch).map_err(ServiceError::Storage)?;
            Ok(batch)
        })
    }

    pub fn apply_label(
        &self,
        fragment_id: &str,
        label: SentimentLabel,
        annotator: &str,
        at: DateTime<Utc>,
    ) -> Result<Fragment, ServiceError> {
        if annotator.trim().is_empty() {
            return Err(ServiceError::validation("annotator must not be empty"));
        }
        self.mutate(|state, logs| {
            let fragment = state.corpus.apply_label(fragment_id, label, annotator.trim(), at).map_err(corpus_error)?.clone();
            let event = state.corpus.audit_trail().last().expect("label just recorded").clone();
            logs.labels.append(&[event]).map_err(ServiceError::Storage)?;
            Ok(fragment)
        })
    }

    /// Records a screening batch and queues its negative predictions.
    /// Returns the run and the newly created triage items.
    pub fn record_screen(
        &self,
        classifier: &str,
        items: &[ScreenedItem],
        at: DateTime<Utc>,
    ) -> Result<(ScreenRun, Vec<TriageItem>), ServiceError> {
        self.mutate(|state, logs| {
            let run = ScreenRun {
                run_id: format!("scr-{:06}", state.screens.len() + 1),
                classifier: classifier.to_string(),
                at,
                fragment_ids: items.iter().map(|i| i.fragment.id.clone()).collect(),
                failed: items.iter().filter(|i| i.error.is_some()).count(),
            };
            let events = state.triage.plan_enqueue(&run.run_id, items, at);
            let mut created = Vec::with_capacity(events.len());
            for event in &events {
                created.push(state.triage.apply(event)?.clone());
            }
            state.screens.push(run.clone());
            let mut lines = vec![TriageLine::Screen(run.clone())];
            lines.extend(events.into_iter().map(TriageLine::Queue));
            logs.triage.append(&lines).map_err(ServiceError::Storage)?;
            Ok((run, created))
        })
    }

    pub fn decide(
        &self,
        item_id: &str,
        decision: Decision,
        analyst: &str,
        at: DateTime<Utc>,
    ) -> Result<TriageItem, ServiceError> {
        self.mutate(|state, logs| {
            let event = state.triage.plan_decision(item_id, decision, analyst, at)?;
            let item = state.triage.apply(&event)?.clone();
            logs.triage.append(&[TriageLine::Queue(event)]).map_err(ServiceError::Storage)?;
            Ok(item)
        })
    }

    /// Assigns a run id and persists the record.
    pub fn record_run(&self, mut record: EvalRunRecord) -> Result<EvalRunRecord, ServiceError> {
        self.mutate(|state, logs| {
            record.run_id = format!("run-{:06}", state.runs.len() + 1);
            record.check_consistency().map_err(ServiceError::Storage)?;
            state.runs.insert(record.run_id.clone(), record.clone());
            logs.runs.append(std::slice::from_ref(&record)).map_err(ServiceError::Storage)?;
            Ok(record)
        })
    }
}
