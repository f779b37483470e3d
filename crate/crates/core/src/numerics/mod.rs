//! Numbers in reports and summaries: extraction from prose and table cells,
//! unit-aware matching, source types, density, and explanations for summary
//! numbers that only appear as the result of a simple operation.

mod derive;
mod extract;
mod index;

pub use derive::{explain_type_d, half_up, DerivedOpExplanation, DerivedOpKind, Locality, MAX_ROUNDING_DP};
pub use extract::{
    extract_document_numbers, extract_numbers, extract_prose_numbers, extract_table_numbers, table_scale,
    Container, NumericMention, Scale, ScaleSource, DATE_PATTERN, TABLE_INDEX_PATTERN, TARGET_PATTERN,
};
pub use index::{classify_source_type, numbers_match, MatchKey, NumberIndex, SourceType, TypeCounts};

use thiserror::Error;

use crate::corpus::word_count;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericsError {
    #[error("cannot compute a density over zero words")]
    ZeroWords,
}

/// Numbers per hundred words.
pub fn density_ratio(numbers: f64, words: f64) -> Result<f64, NumericsError> {
    if words <= 0.0 {
        return Err(NumericsError::ZeroWords);
    }
    Ok(numbers * 100.0 / words)
}

/// Extracted numbers as a percentage of whitespace-delimited words.
pub fn density(text: &str) -> Result<f64, NumericsError> {
    density_ratio(extract_numbers(text).len() as f64, word_count(text) as f64)
}
