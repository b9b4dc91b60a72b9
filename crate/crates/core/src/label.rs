//! The three sentiment classes and a small fixed-size map keyed by them.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Sentiment class of a fragment.
///
/// The declaration order is the canonical class order used for matrix
/// indexing, tie-breaking and every per-class listing: negative, neutral,
/// positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [Self::Negative, Self::Neutral, Self::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Negative => "negative",
            Self::Neutral => "neutral",
            Self::Positive => "positive",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown sentiment label `{0}` (expected negative, neutral or positive)")]
pub struct ParseLabelError(pub String);

impl FromStr for SentimentLabel {
    type Err = ParseLabelError;

    /// Case-insensitive; surrounding whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "negative" => Ok(Self::Negative),
            "neutral" => Ok(Self::Neutral),
            "positive" => Ok(Self::Positive),
            _ => Err(ParseLabelError(s.to_string())),
        }
    }
}

/// One value per sentiment class, stored in canonical class order.
///
/// Serializes as `{"negative": .., "neutral": .., "positive": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct PerClass<T>(pub [T; 3]);

impl<T> PerClass<T> {
    pub fn from_fn(mut f: impl FnMut(SentimentLabel) -> T) -> Self {
        PerClass([
            f(SentimentLabel::Negative),
            f(SentimentLabel::Neutral),
            f(SentimentLabel::Positive),
        ])
    }

    pub fn iter(&self) -> impl Iterator<Item = (SentimentLabel, &T)> {
        SentimentLabel::ALL.into_iter().zip(self.0.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(SentimentLabel, &T) -> U) -> PerClass<U> {
        PerClass::from_fn(|label| f(label, &self[label]))
    }
}

impl<T> Index<SentimentLabel> for PerClass<T> {
    type Output = T;

    fn index(&self, label: SentimentLabel) -> &T {
        &self.0[label.index()]
    }
}

impl<T> IndexMut<SentimentLabel> for PerClass<T> {
    fn index_mut(&mut self, label: SentimentLabel) -> &mut T {
        &mut self.0[label.index()]
    }
}

#[derive(Serialize, Deserialize)]
struct PerClassRepr<T> {
    negative: T,
    neutral: T,
    positive: T,
}

impl<T: Serialize> Serialize for PerClass<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let [negative, neutral, positive] = &self.0;
        PerClassRepr { negative, neutral, positive }.serialize(serializer)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for PerClass<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PerClassRepr::<T>::deserialize(deserializer)?;
        Ok(PerClass([repr.negative, repr.neutral, repr.positive]))
    }
}
