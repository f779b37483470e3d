//! Measurement toolkit for LLM summaries of long, table-heavy financial reports.
//!
//! The crate is organized around four analyses that share one document model:
//!
//! * [`corpus`] parses MD&A filings into [`Document`]s, segments sentences and
//!   produces shuffled and truncated variants.
//! * [`trace`] aligns summary sentences against report sentences with a greedy
//!   longest-fragment matcher and attributes extractive sources.
//! * [`numerics`] extracts numeric mentions, assigns source types and explains
//!   derived values.
//! * [`audit`] holds the annotation records and statistics for numeric
//!   hallucination review.

pub mod audit;
pub mod corpus;
pub mod numerics;
pub mod trace;

pub use corpus::{Document, Paragraph, ParagraphBody, RawFiling, Sentence, StopwordList, Table};
