use chrono::{DateTime, Utc};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::candidates::{extract_candidates, CandidateQuote};
use super::record::{AnnotationRecord, HallucinationLabel, MentionRef, RecordKey, STORE_SCHEMA_VERSION};
use crate::corpus::Document;
use crate::numerics::{classify_source_type, extract_prose_numbers, Container, NumberIndex, Scale, SourceType};

/// Who produced a summary, carried onto its tasks and records.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryMeta {
    pub summary_id: String,
    pub filing_id: String,
    pub model: String,
    pub prompt: String,
}

/// One summary number awaiting a judgement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationTask {
    pub task_id: u64,
    #[serde(flatten)]
    pub meta: SummaryMeta,
    pub mention: MentionRef,
    pub value: Decimal,
    pub raw_value: String,
    pub scale: Scale,
    pub source_type: SourceType,
    pub summary_sentence_text: String,
    pub candidates: Vec<CandidateQuote>,
}

/// The annotator's part of a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub label: HallucinationLabel,
    #[serde(default)]
    pub evidence_quote: Option<String>,
    #[serde(default)]
    pub comment: String,
    pub annotator: String,
    pub revision: u64,
}

impl AnnotationTask {
    pub fn key(&self) -> RecordKey {
        RecordKey {
            summary_id: self.meta.summary_id.clone(),
            mention: self.mention,
        }
    }

    pub fn to_record(&self, submission: Submission, timestamp: DateTime<Utc>) -> AnnotationRecord {
        AnnotationRecord {
            schema_version: STORE_SCHEMA_VERSION,
            summary_id: self.meta.summary_id.clone(),
            mention: self.mention,
            model: self.meta.model.clone(),
            prompt: self.meta.prompt.clone(),
            summary_sentence_text: self.summary_sentence_text.clone(),
            value: self.value,
            raw_value: self.raw_value.clone(),
            candidates: self.candidates.clone(),
            label: submission.label,
            evidence_quote: submission.evidence_quote,
            comment: submission.comment,
            annotator: submission.annotator,
            revision: submission.revision,
            timestamp,
        }
    }
}

/// One task per number in a segmented summary, ids counting up from
/// `first_id` in summary order.
pub fn tasks_for_summary(
    first_id: u64,
    meta: &SummaryMeta,
    summary: &Document,
    report: &Document,
    index: &NumberIndex,
) -> Vec<AnnotationTask> {
    extract_prose_numbers(summary)
        .into_iter()
        .zip(first_id..)
        .filter_map(|(m, task_id)| {
            let Container::Prose {
                paragraph_index,
                sentence_index,
            } = m.container
            else {
                return None;
            };
            let sentence = summary.sentences.get(sentence_index)?;
            Some(AnnotationTask {
                task_id,
                meta: meta.clone(),
                mention: MentionRef {
                    paragraph_index,
                    sentence_index,
                    span: m.char_span,
                },
                value: m.value,
                raw_value: m.raw_text.clone(),
                scale: m.scale,
                source_type: classify_source_type(&m, index),
                summary_sentence_text: summary.sentence_text(sentence).to_string(),
                candidates: extract_candidates(&m, report, index),
            })
        })
        .collect()
}
