//! Filing ingestion: HTML to [`Document`], sentence segmentation, and the
//! shuffled / truncated report variants.

mod html;
mod model;
mod segment;
mod stopwords;
mod variants;

pub use html::parse_filing;
pub use model::{
    Cell, Document, Paragraph, ParagraphBody, ParagraphKind, RawFiling, Sentence, Span, Table,
    Token, SCHEMA_VERSION,
};
pub use segment::{segment_and_tokenize, split_sentences, tokenize, word_count};
pub use stopwords::StopwordList;
pub use variants::{
    paragraph_token_count, shuffle_document, truncate_to_budget, truncate_with, Truncation,
    TruncationStrategy,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("filing {0} has no extractable text")]
    EmptyDocument(String),
    #[error("filing {filing_id}: element nesting deeper than {limit} levels")]
    MalformedHtml { filing_id: String, limit: usize },
    #[error("budget of {budget} tokens is smaller than the first paragraph ({first} tokens)")]
    BudgetTooSmall { budget: usize, first: usize },
}
