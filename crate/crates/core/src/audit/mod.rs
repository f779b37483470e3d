//! Machine side of the numeric hallucination audit: candidate quotes for a
//! summary number, annotation records, the append-only store and statistics.

mod candidates;
mod record;
mod stats;
mod store;
mod tasks;

pub use candidates::{extract_candidates, quote_for, CandidateQuote, MatchKind, QuoteLocation};
pub use record::{AnnotationRecord, HallucinationLabel, MentionRef, RecordKey, STORE_SCHEMA_VERSION};
pub use stats::{grouped_stats, hallucination_stats, stats_table_csv, HallucinationStats, StatsFilter};
pub use store::{AnnotationStore, Snapshot};
pub use tasks::{tasks_for_summary, AnnotationTask, Submission, SummaryMeta};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("stale revision: expected {expected}, got {got}")]
    StaleRevision { expected: u64, got: u64 },
    #[error("no annotations match the filter")]
    NoAnnotations,
    #[error("unsupported store schema version {0}")]
    UnsupportedSchema(u32),
    #[error("store line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("store i/o: {0}")]
    Io(String),
}
