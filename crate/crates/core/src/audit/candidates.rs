use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Span};
use crate::numerics::{Container, NumberIndex, NumericMention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuoteLocation {
    Sentence {
        paragraph_index: usize,
        sentence_index: usize,
    },
    Cell {
        paragraph_index: usize,
        row: usize,
        col: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    FormatVariant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateQuote {
    pub location: QuoteLocation,
    /// The sentence, or the cell's raw text.
    pub quote_text: String,
    /// For cells, the whole row rendered with ` | ` separators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub match_kind: MatchKind,
    pub matched_raw: String,
    pub matched_value: Decimal,
    /// Span of the matched number within `quote_text`.
    pub span: Span,
}

fn location_of(m: &NumericMention) -> Option<QuoteLocation> {
    match m.container {
        Container::Prose {
            paragraph_index,
            sentence_index,
        } => Some(QuoteLocation::Sentence {
            paragraph_index,
            sentence_index,
        }),
        Container::TableCell {
            paragraph_index,
            row,
            col,
        } => Some(QuoteLocation::Cell {
            paragraph_index,
            row,
            col,
        }),
        Container::Text => None,
    }
}

/// The quote for a report mention: its sentence or cell, plus the mention's
/// span re-based onto that quote.
pub fn quote_for(report: &Document, m: &NumericMention) -> Option<(QuoteLocation, String, Option<String>, Span)> {
    let location = location_of(m)?;
    match location {
        QuoteLocation::Sentence { sentence_index, .. } => {
            let sentence = report.sentences.get(sentence_index)?;
            let text = report.sentence_text(sentence).to_string();
            let start = m.char_span.start.checked_sub(sentence.char_span.start)?;
            Some((location, text, None, Span::new(start, start + m.char_span.len())))
        }
        QuoteLocation::Cell {
            paragraph_index,
            row,
            col,
        } => {
            let table = report.paragraphs.get(paragraph_index)?.as_table()?;
            let cell = table.cells.iter().find(|c| c.row == row && c.col == col)?;
            let context = table.rows().get(row).map(|cells| {
                cells
                    .iter()
                    .map(|c| c.raw_text.trim())
                    .collect::<Vec<_>>()
                    .join(" | ")
            });
            Some((location, cell.raw_text.clone(), context, m.char_span))
        }
    }
}

/// Every report sentence and cell holding a number equal to `value`, in
/// document order, one quote per location.
pub fn extract_candidates(value: &NumericMention, report: &Document, index: &NumberIndex) -> Vec<CandidateQuote> {
    let mut out: Vec<CandidateQuote> = Vec::new();
    for m in index.matches(value) {
        let Some((location, quote_text, context, span)) = quote_for(report, m) else {
            continue;
        };
        if out.last().is_some_and(|c| c.location == location) {
            continue;
        }
        out.push(CandidateQuote {
            location,
            quote_text,
            context,
            match_kind: if m.raw_text == value.raw_text {
                MatchKind::Exact
            } else {
                MatchKind::FormatVariant
            },
            matched_raw: m.raw_text.clone(),
            matched_value: m.value,
            span,
        });
    }
    out
}
