//! Analyst triage of fragments predicted negative.
//!
//! An item starts `pending` and moves once, to `escalated` or `dismissed`.
//! Every change is expressed as a [`TriageEvent`]; the queue is the fold of
//! its events, which is how it is rebuilt after a restart.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use mediascreen_core::classify::{Prediction, ScreenedItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriageStatus {
    Pending,
    Escalated,
    Dismissed,
}

impl FromStr for TriageStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pending" => Ok(TriageStatus::Pending),
            "escalated" => Ok(TriageStatus::Escalated),
            "dismissed" => Ok(TriageStatus::Dismissed),
            other => Err(format!("unknown triage status `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Escalate,
    Dismiss,
}

impl Decision {
    pub fn outcome(self) -> TriageStatus {
        match self {
            Decision::Escalate => TriageStatus::Escalated,
            Decision::Dismiss => TriageStatus::Dismissed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriageItem {
    pub id: String,
    /// Screening run that flagged the fragment.
    pub run_id: String,
    pub fragment_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
    /// Fragment text at screening time.
    pub text: String,
    pub prediction: Prediction,
    pub status: TriageStatus,
    pub created_at: DateTime<Utc>,
    pub decided_by: Option<String>,
    pub decided_at: Option<DateTime<Utc>>,
}

impl TriageItem {
    /// Decision fields are set exactly when the item is no longer pending.
    pub fn is_well_formed(&self) -> bool {
        let decided = self.status != TriageStatus::Pending;
        decided == self.decided_by.is_some() && decided == self.decided_at.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TriageEvent {
    Enqueued { item: TriageItem },
    Decided { item_id: String, decision: Decision, analyst: String, at: DateTime<Utc> },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TriageError {
    #[error("triage item `{0}` not found")]
    NotFound(String),
    #[error("triage item `{id}` was already {status:?}")]
    AlreadyDecided { id: String, status: TriageStatus },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default)]
pub struct TriageQueue {
    items: BTreeMap<String, TriageItem>,
    /// Item ids in creation order.
    order: Vec<String>,
    by_key: HashMap<(String, String), String>,
}

fn item_id(seq: usize) -> String {
    format!("tri-{seq:06}")
}

impl TriageQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TriageItem> {
        self.items.get(id)
    }

    /// Items in creation order, oldest first, optionally filtered by status.
    pub fn iter(&self, status: Option<TriageStatus>) -> impl Iterator<Item = &TriageItem> {
        self.order
            .iter()
            .map(|id| &self.items[id])
            .filter(move |item| status.is_none_or(|s| item.status == s))
    }

    /// Events creating one pending item per negative prediction in `batch`
    /// not already queued for this run.
    pub fn plan_enqueue(&self, run_id: &str, batch: &[ScreenedItem], now: DateTime<Utc>) -> Vec<TriageEvent> {
        let mut events = Vec::new();
        let mut planned: Vec<&str> = Vec::new();
        for screened in batch.iter().filter(|s| s.flagged) {
            let fragment_id = screened.fragment.id.as_str();
            let key = (run_id.to_string(), fragment_id.to_string());
            if self.by_key.contains_key(&key) || planned.contains(&fragment_id) {
                continue;
            }
            let Some(prediction) = screened.prediction.clone() else { continue };
            planned.push(fragment_id);
            events.push(TriageEvent::Enqueued {
                item: TriageItem {
                    id: item_id(self.order.len() + events.len() + 1),
                    run_id: run_id.to_string(),
                    fragment_id: fragment_id.to_string(),
                    doc_id: Some(screened.fragment.doc_id.clone()).filter(|d| !d.is_empty()),
                    text: screened.fragment.text.clone(),
                    prediction,
                    status: TriageStatus::Pending,
                    created_at: now,
                    decided_by: None,
                    decided_at: None,
                },
            });
        }
        events
    }

    pub fn plan_decision(
        &self,
        item_id: &str,
        decision: Decision,
        analyst: &str,
        now: DateTime<Utc>,
    ) -> Result<TriageEvent, TriageError> {
        if analyst.trim().is_empty() {
            return Err(TriageError::Invalid("analyst must not be empty".into()));
        }
        let item = self.items.get(item_id).ok_or_else(|| TriageError::NotFound(item_id.to_string()))?;
        if item.status != TriageStatus::Pending {
            return Err(TriageError::AlreadyDecided { id: item_id.to_string(), status: item.status });
        }
        Ok(TriageEvent::Decided { item_id: item_id.to_string(), decision, analyst: analyst.trim().to_string(), at: now })
    }

    /// Applies an event, rejecting any that would break the state machine.
    pub fn apply(&mut self, event: &TriageEvent) -> Result<&TriageItem, TriageError> {
        match event {
            TriageEvent::Enqueued { item } => {
                let key = (item.run_id.clone(), item.fragment_id.clone());
                if item.status != TriageStatus::Pending || !item.is_well_formed() {
                    return Err(TriageError::Invalid(format!("item `{}` must be enqueued pending", item.id)));
                }
                if self.items.contains_key(&item.id) || self.by_key.contains_key(&key) {
                    return Err(TriageError::Invalid(format!("item `{}` is already queued", item.id)));
                }
                self.by_key.insert(key, item.id.clone());
                self.order.push(item.id.clone());
                self.items.insert(item.id.clone(), item.clone());
                Ok(&self.items[&item.id])
            }
            TriageEvent::Decided { item_id, decision, analyst, at } => {
                let item = self.items.get_mut(item_id).ok_or_else(|| TriageError::NotFound(item_id.clone()))?;
                if item.status != TriageStatus::Pending {
                    return Err(TriageError::AlreadyDecided { id: item_id.clone(), status: item.status });
                }
                item.status = decision.outcome();
                item.decided_by = Some(analyst.clone());
                item.decided_at = Some(*at);
                Ok(item)
            }
        }
    }

    /// Plans and applies in one step; returns the newly created items.
    pub fn enqueue(&mut self, run_id: &str, batch: &[ScreenedItem], now: DateTime<Utc>) -> Vec<TriageItem> {
        let events = self.plan_enqueue(run_id, batch, now);
        events
            .iter()
            .map(|e| self.apply(e).expect("planned events apply cleanly").clone())
            .collect()
    }

    pub fn decide(
        &mut self,
        item_id: &str,
        decision: Decision,
        analyst: &str,
        now: DateTime<Utc>,
    ) -> Result<TriageItem, TriageError> {
        let event = self.plan_decision(item_id, decision, analyst, now)?;
        self.apply(&event).cloned()
    }

    /// Checks every structural invariant; used by tests and after replay.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.order.len() != self.items.len() || self.by_key.len() != self.items.len() {
            return Err("index sizes disagree".into());
        }
        for (n, id) in self.order.iter().enumerate() {
            let item = self.items.get(id).ok_or_else(|| format!("order lists unknown item {id}"))?;
            if *id != item_id(n + 1) {
                return Err(format!("item {id} out of sequence"));
            }
            if !item.is_well_formed() {
                return Err(format!("item {id} has inconsistent decision fields"));
            }
            if self.by_key.get(&(item.run_id.clone(), item.fragment_id.clone())) != Some(id) {
                return Err(format!("item {id} missing from key index"));
            }
        }
        Ok(())
    }
}
