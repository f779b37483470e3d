use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{Document, Paragraph, ParagraphBody, Sentence};
use super::segment::tokenize;
use super::CorpusError;

/// Seeded Fisher–Yates permutation of paragraph order.
///
/// Tables move as whole paragraphs. Sentences keep their paragraph-relative
/// spans and are re-indexed in the new reading order.
pub fn shuffle_document(doc: &Document, seed: u64) -> Document {
    let mut order: Vec<usize> = (0..doc.paragraphs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    reorder(doc, &order)
}

/// Rebuild `doc` with paragraphs in `order` (old indices, new reading order).
fn reorder(doc: &Document, order: &[usize]) -> Document {
    let mut paragraphs = Vec::with_capacity(order.len());
    let mut sentences: Vec<Sentence> = Vec::with_capacity(doc.sentences.len());
    for (new_index, &old_index) in order.iter().enumerate() {
        let old = &doc.paragraphs[old_index];
        paragraphs.push(Paragraph {
            index: new_index,
            body: old.body.clone(),
        });
        for s in doc.sentences_of(old_index) {
            sentences.push(Sentence {
                index: sentences.len(),
                paragraph_index: new_index,
                ..s.clone()
            });
        }
    }
    Document {
        schema_version: doc.schema_version,
        filing_id: doc.filing_id.clone(),
        total_content_tokens: sentences.iter().map(|s| s.content_tokens.len()).sum(),
        paragraphs,
        sentences,
    }
}

/// Token count the budget sees for one paragraph: all tokens of the prose,
/// or of every cell for a table.
pub fn paragraph_token_count(paragraph: &Paragraph) -> usize {
    match &paragraph.body {
        ParagraphBody::Prose { text } => tokenize(text).len(),
        ParagraphBody::Table { table } => table
            .cells
            .iter()
            .map(|c| tokenize(&c.raw_text).len())
            .sum(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationStrategy {
    /// Keep the longest fitting prefix of paragraphs.
    #[default]
    HeadKeep,
    /// Keep the longest fitting suffix; only for sensitivity checks.
    TailKeep,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truncation {
    pub document: Document,
    pub truncated_tokens: usize,
    pub kept_paragraphs: usize,
}

/// Head-keep truncation. Returns the kept document and the dropped token count.
pub fn truncate_to_budget(
    doc: &Document,
    budget_tokens: usize,
) -> Result<(Document, usize), CorpusError> {
    truncate_with(doc, budget_tokens, TruncationStrategy::HeadKeep)
        .map(|t| (t.document, t.truncated_tokens))
}

pub fn truncate_with(
    doc: &Document,
    budget_tokens: usize,
    strategy: TruncationStrategy,
) -> Result<Truncation, CorpusError> {
    let counts: Vec<usize> = doc.paragraphs.iter().map(paragraph_token_count).collect();
    let total: usize = counts.iter().sum();

    let ordered: Vec<usize> = match strategy {
        TruncationStrategy::HeadKeep => (0..counts.len()).collect(),
        TruncationStrategy::TailKeep => (0..counts.len()).rev().collect(),
    };
    if let Some(&first) = ordered.first() {
        if counts[first] > budget_tokens {
            return Err(CorpusError::BudgetTooSmall {
                budget: budget_tokens,
                first: counts[first],
            });
        }
    }

    let mut used = 0;
    let mut kept = Vec::new();
    for idx in ordered {
        if used + counts[idx] > budget_tokens {
            break;
        }
        used += counts[idx];
        kept.push(idx);
    }
    kept.sort_unstable();

    let document = if kept.len() == doc.paragraphs.len() {
        doc.clone()
    } else {
        reorder(doc, &kept)
    };
    Ok(Truncation {
        kept_paragraphs: kept.len(),
        truncated_tokens: total - used,
        document,
    })
}
