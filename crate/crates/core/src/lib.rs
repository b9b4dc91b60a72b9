//! Adverse-media screening for English and Bangla text.
//!
//! Documents come in through [`ingest`], are cleaned and cut into sentence
//! fragments by [`textprep`], stored and labeled in [`corpus`], classified
//! by [`classify`] and scored by [`metrics`]. [`pipeline`] ties the last
//! three together for evaluation runs.

pub mod classify;
pub mod corpus;
pub mod fsutil;
pub mod ingest;
pub mod label;
pub mod metrics;
pub mod pipeline;
pub mod retry;
pub mod textprep;

pub use label::{PerClass, SentimentLabel};
