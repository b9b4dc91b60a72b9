use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{Classifier, ClassifyError, Prediction};
use crate::corpus::Fragment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenedItem {
    pub fragment: Fragment,
    pub prediction: Option<Prediction>,
    pub error: Option<ClassifyError>,
    /// Predicted negative and therefore routed to analyst triage.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BatchResult {
    /// One entry per input fragment, in input order.
    pub items: Vec<ScreenedItem>,
}

impl BatchResult {
    pub fn flagged(&self) -> impl Iterator<Item = &ScreenedItem> {
        self.items.iter().filter(|i| i.flagged)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ScreenedItem> {
        self.items.iter().filter(|i| i.error.is_some())
    }
}

/// Classifies every fragment, keeping input order. A failure on one item is
/// recorded in that item's slot and does not stop the batch.
///
/// Up to `classifier.max_parallelism()` fragments are classified at once.
pub fn screen_batch(classifier: &dyn Classifier, fragments: &[Fragment]) -> BatchResult {
    let workers = classifier.max_parallelism().clamp(1, fragments.len().max(1));
    let outcomes: Vec<Result<Prediction, ClassifyError>> = if workers == 1 {
        fragments.iter().map(|f| classifier.classify(f)).collect()
    } else {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<Prediction, ClassifyError>>>> = Mutex::new(vec![None; fragments.len()]);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(fragment) = fragments.get(i) else { break };
                    let outcome = classifier.classify(fragment);
                    slots.lock().expect("slot lock")[i] = Some(outcome);
                });
            }
        });
        slots
            .into_inner()
            .expect("slot lock")
            .into_iter()
            .map(|o| o.expect("every slot filled"))
            .collect()
    };

    let items = fragments
        .iter()
        .zip(outcomes)
        .map(|(fragment, outcome)| match outcome {
            Ok(prediction) => ScreenedItem {
                fragment: fragment.clone(),
                flagged: prediction.is_flagged(),
                prediction: Some(prediction),
                error: None,
            },
            Err(error) => ScreenedItem { fragment: fragment.clone(), prediction: None, error: Some(error), flagged: false },
        })
        .collect();
    BatchResult { items }
}
