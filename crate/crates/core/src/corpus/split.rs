//! Seeded, stratified train/test splitting of labeled fragments.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Fragment;
use crate::label::{PerClass, SentimentLabel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("fragment id `{0}` appears more than once in the split input")]
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train_ids: BTreeSet<String>,
    pub test_ids: BTreeSet<String>,
    pub seed: u64,
    pub test_fraction: f64,
}

impl DatasetSplit {
    pub fn is_test(&self, id: &str) -> bool {
        self.test_ids.contains(id)
    }

    pub fn is_train(&self, id: &str) -> bool {
        self.train_ids.contains(id)
    }
}

pub fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor() as u64
}

/// Test-set size per class: `round_half_up(n_c * fraction)`, after which the
/// largest class is nudged by one if the total drifts from
/// `round_half_up(N * fraction)` by more than one.
///
/// With three classes the drift is at most one, so the nudge only matters
/// for callers allocating over more groups.
pub fn allocate_test_sizes(supports: &[u64], fraction: f64) -> Vec<u64> {
    let mut sizes: Vec<u64> = supports.iter().map(|&n| round_half_up(n as f64 * fraction).min(n)).collect();
    let total: u64 = supports.iter().sum();
    let target = round_half_up(total as f64 * fraction) as i64;
    let drift = sizes.iter().sum::<u64>() as i64 - target;
    if drift.abs() > 1 {
        if let Some((largest, _)) = supports.iter().enumerate().max_by_key(|&(i, &n)| (n, std::cmp::Reverse(i))) {
            if drift > 0 && sizes[largest] > 0 {
                sizes[largest] -= 1;
            } else if drift < 0 && sizes[largest] < supports[largest] {
                sizes[largest] += 1;
            }
        }
    }
    sizes
}

/// Splits the labeled fragments into train and test sets, stratified by
/// label. Unlabeled fragments are ignored; empty classes contribute nothing.
///
/// The result depends only on the set of (id, label) pairs, the fraction and
/// the seed: ids are sorted per class before the seeded shuffle, so input
/// order does not matter.
pub fn stratified_split<'a, I>(fragments: I, test_fraction: f64, seed: u64) -> Result<DatasetSplit, SplitError>
where
    I: IntoIterator<Item = &'a Fragment>,
{
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(SplitError::InvalidFraction(test_fraction));
    }

    let mut by_class: PerClass<Vec<&str>> = PerClass::default();
    let mut seen = HashSet::new();
    for fragment in fragments {
        let Some(label) = fragment.label else { continue };
        if !seen.insert(fragment.id.as_str()) {
            return Err(SplitError::DuplicateId(fragment.id.clone()));
        }
        by_class[label].push(fragment.id.as_str());
    }

    let supports: Vec<u64> = by_class.0.iter().map(|ids| ids.len() as u64).collect();
    let sizes = allocate_test_sizes(&supports, test_fraction);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_ids = BTreeSet::new();
    let mut test_ids = BTreeSet::new();
    for label in SentimentLabel::ALL {
        let ids = &mut by_class[label];
        if ids.is_empty() {
            continue;
        }
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        let k = sizes[label.index()] as usize;
        test_ids.extend(ids[..k].iter().map(|s| s.to_string()));
        train_ids.extend(ids[k..].iter().map(|s| s.to_string()));
    }

    Ok(DatasetSplit { train_ids, test_ids, seed, test_fraction })
}
