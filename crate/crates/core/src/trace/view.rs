use serde::{Deserialize, Serialize};

use crate::corpus::{Document, ParagraphBody, StopwordList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitKind {
    Sentence { sentence_index: usize },
    Table { paragraph_index: usize },
}

/// One alignment target: a prose sentence, or a whole table serialized as its
/// cell text in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportUnit {
    pub index: usize,
    pub kind: UnitKind,
    pub text: String,
    pub content: Vec<String>,
}

/// A report as an ordered list of alignment units. Source indices and
/// position fractions refer to unit order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportView {
    pub filing_id: String,
    pub units: Vec<ReportUnit>,
}

impl ReportView {
    /// `doc` must be segmented. Tables are interleaved at their paragraph
    /// position when `include_tables` is set.
    pub fn new(doc: &Document, stopwords: &StopwordList, include_tables: bool) -> Self {
        let mut units = Vec::new();
        for paragraph in &doc.paragraphs {
            match &paragraph.body {
                ParagraphBody::Prose { .. } => {
                    for s in doc.sentences_of(paragraph.index) {
                        units.push(ReportUnit {
                            index: units.len(),
                            kind: UnitKind::Sentence {
                                sentence_index: s.index,
                            },
                            text: doc.sentence_text(s).to_string(),
                            content: s.content_tokens.iter().map(|t| t.text.clone()).collect(),
                        });
                    }
                }
                ParagraphBody::Table { table } if include_tables => {
                    let text = table.row_major_text();
                    let content = stopwords.content_words(&text);
                    if content.is_empty() {
                        continue;
                    }
                    units.push(ReportUnit {
                        index: units.len(),
                        kind: UnitKind::Table {
                            paragraph_index: paragraph.index,
                        },
                        text,
                        content,
                    });
                }
                ParagraphBody::Table { .. } => {}
            }
        }
        Self {
            filing_id: doc.filing_id.clone(),
            units,
        }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}
