//! Extractiveness tracing: which report sentences a summary sentence copies
//! from, and where in the report they sit.
//!
//! Scores follow the fragment-coverage measure with a quadratic bonus:
//! `similarity(S, R) = (1/|S|) Σ_m (|m| + 0.1 |m|²)` over the greedy
//! fragments `m` of summary sentence `S` in report sentence `R`, both as
//! casefolded content tokens.

mod classify;
mod embed;
mod greedy;
mod histogram;
mod view;

pub use classify::{
    AttributionClass, AttributionRecord, SentenceAttribution, TraceConfig, Tracer,
};
pub use embed::{cosine, EmbeddingError, EmbeddingProvider, LexicalEmbedder};
pub use greedy::{greedy_fragments, score_tokens, Fragment, Score};
pub use histogram::{position_histogram, HistogramBin, HistogramSource, PositionHistogram};
pub use view::{ReportUnit, ReportView, UnitKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("summary sentence {0} has no content tokens")]
    EmptySummarySentence(usize),
    #[error("summary sentence {index} out of range ({len} sentences)")]
    SentenceOutOfRange { index: usize, len: usize },
    #[error("histogram needs at least 2 bins, got {0}")]
    InvalidBins(usize),
}

/// Similarity of two content-token sequences as a real number.
pub fn similarity<T: AsRef<str>>(summary: &[T], report: &[T]) -> Result<f64, TraceError> {
    if summary.is_empty() {
        return Err(TraceError::EmptySummarySentence(0));
    }
    let s: Vec<&str> = summary.iter().map(AsRef::as_ref).collect();
    let r: Vec<&str> = report.iter().map(AsRef::as_ref).collect();
    Ok(score_tokens(&s, &r).value())
}
