use std::collections::HashMap;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;

use mediascreen_core::classify::{Prediction, PredictionSource, ScreenedItem};
use mediascreen_core::corpus::Fragment;
use mediascreen_core::textprep::LanguageTag;
use mediascreen_core::SentimentLabel;
use mediascreen_service::triage::{Decision, TriageError, TriageQueue, TriageStatus};

#[derive(Debug, Clone)]
enum Op {
    /// Screen these (fragment number, predicted class) pairs under a run.
    Screen { run: u8, items: Vec<(u8, u8)> },
    Decide { item: u16, escalate: bool },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0u8..4, prop::collection::vec((0u8..12, 0u8..3), 0..6)).prop_map(|(run, items)| Op::Screen { run, items }),
        (0u16..40, any::<bool>()).prop_map(|(item, escalate)| Op::Decide { item, escalate }),
    ]
}

fn screened(n: u8, class: u8) -> ScreenedItem {
    let label = SentimentLabel::ALL[class as usize];
    let prediction = Prediction::degenerate(label, PredictionSource::Baseline);
    ScreenedItem {
        fragment: Fragment {
            id: format!("f{n}#0"),
            doc_id: format!("f{n}"),
            index: 0,
            text: format!("text {n}"),
            lang: LanguageTag::English,
            label: None,
            predicted: None,
        },
        flagged: prediction.is_flagged(),
        prediction: Some(prediction),
        error: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    // 100 cases of 100 operations each.
    #[test]
    fn random_operations_keep_the_queue_valid(ops in prop::collection::vec(op(), 100)) {
        let mut queue = TriageQueue::new();
        // Reference model: (run, fragment) -> status, plus creation order.
        let mut model: HashMap<(String, String), TriageStatus> = HashMap::new();
        let mut ids: Vec<String> = Vec::new();
        let now = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();

        for op in ops {
            match op {
                Op::Screen { run, items } => {
                    let run_id = format!("scr-{run}");
                    let batch: Vec<ScreenedItem> = items.iter().map(|&(n, c)| screened(n, c)).collect();
                    let created = queue.enqueue(&run_id, &batch, now);
                    let mut expected = 0;
                    for s in batch.iter().filter(|s| s.flagged) {
                        let key = (run_id.clone(), s.fragment.id.clone());
                        if let std::collections::hash_map::Entry::Vacant(e) = model.entry(key) {
                            e.insert(TriageStatus::Pending);
                            expected += 1;
                        }
                    }
                    prop_assert_eq!(created.len(), expected);
                    for item in created {
                        prop_assert_eq!(item.status, TriageStatus::Pending);
                        ids.push(item.id);
                    }
                }
                Op::Decide { item, escalate } => {
                    let decision = if escalate { Decision::Escalate } else { Decision::Dismiss };
                    let id = ids.get(item as usize).cloned().unwrap_or_else(|| format!("tri-{:06}", 900_000 + item as u32));
                    let before = queue.get(&id).cloned();
                    match (before, queue.decide(&id, decision, "analyst", now)) {
                        (None, Err(TriageError::NotFound(_))) => {}
                        (Some(b), Ok(after)) => {
                            prop_assert_eq!(b.status, TriageStatus::Pending);
                            prop_assert_eq!(after.status, decision.outcome());
                            let key = (after.run_id.clone(), after.fragment_id.clone());
                            model.insert(key, after.status);
                        }
                        (Some(b), Err(TriageError::AlreadyDecided { status, .. })) => {
                            prop_assert_ne!(b.status, TriageStatus::Pending);
                            prop_assert_eq!(status, b.status);
                            prop_assert_eq!(queue.get(&id), Some(&b));
                        }
                        (b, r) => prop_assert!(false, "unexpected outcome {:?} -> {:?}", b, r),
                    }
                }
            }
            prop_assert!(queue.check_invariants().is_ok());
        }

        prop_assert_eq!(queue.len(), model.len());
        for item in queue.iter(None) {
            prop_assert!(item.is_well_formed());
            prop_assert_eq!(model[&(item.run_id.clone(), item.fragment_id.clone())], item.status);
        }
    }
}
