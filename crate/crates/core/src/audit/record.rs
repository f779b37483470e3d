use chrono::{DateTime, Utc};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::candidates::CandidateQuote;
use super::AuditError;
use crate::corpus::Span;

pub const STORE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HallucinationLabel {
    NoHallucination,
    FabricatedNumber,
    RoundingError,
    ArithmeticError,
    ContextMismatch,
    /// Not yet judged; kept so half-done queues survive restarts.
    Pending,
}

impl HallucinationLabel {
    pub const HALLUCINATIONS: [HallucinationLabel; 4] = [
        HallucinationLabel::FabricatedNumber,
        HallucinationLabel::ArithmeticError,
        HallucinationLabel::RoundingError,
        HallucinationLabel::ContextMismatch,
    ];

    pub fn is_hallucination(self) -> bool {
        Self::HALLUCINATIONS.contains(&self)
    }

    pub fn title(self) -> &'static str {
        match self {
            Self::NoHallucination => "No hallucination",
            Self::FabricatedNumber => "Fabricated number",
            Self::RoundingError => "Rounding error",
            Self::ArithmeticError => "Arithmetic error",
            Self::ContextMismatch => "Context mismatch",
            Self::Pending => "Pending",
        }
    }
}

/// A summary number's position: paragraph and sentence of the summary plus
/// the byte span within that paragraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MentionRef {
    pub paragraph_index: usize,
    pub sentence_index: usize,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RecordKey {
    pub summary_id: String,
    pub mention: MentionRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub schema_version: u32,
    pub summary_id: String,
    pub mention: MentionRef,
    #[serde(default)]
    pub model: String,
    #[serde(default)]
    pub prompt: String,
    pub summary_sentence_text: String,
    pub value: Decimal,
    pub raw_value: String,
    #[serde(default)]
    pub candidates: Vec<CandidateQuote>,
    pub label: HallucinationLabel,
    #[serde(default)]
    pub evidence_quote: Option<String>,
    #[serde(default)]
    pub comment: String,
    pub annotator: String,
    pub revision: u64,
    pub timestamp: DateTime<Utc>,
}

impl AnnotationRecord {
    pub fn key(&self) -> RecordKey {
        RecordKey {
            summary_id: self.summary_id.clone(),
            mention: self.mention,
        }
    }

    /// Evidence is required to clear a number; a comment is required to
    /// label it a hallucination.
    pub fn validate(&self) -> Result<(), AuditError> {
        if self.schema_version != STORE_SCHEMA_VERSION {
            return Err(AuditError::UnsupportedSchema(self.schema_version));
        }
        if self.annotator.trim().is_empty() {
            return Err(AuditError::SchemaViolation("annotator is empty".into()));
        }
        match self.label {
            HallucinationLabel::NoHallucination
                if self.evidence_quote.as_deref().map_or(true, |q| q.trim().is_empty()) =>
            {
                Err(AuditError::SchemaViolation(
                    "no_hallucination requires an evidence quote".into(),
                ))
            }
            l if l.is_hallucination() && self.comment.trim().is_empty() => Err(AuditError::SchemaViolation(
                format!("{} requires a comment", l.title().to_lowercase()),
            )),
            _ => Ok(()),
        }
    }
}
