use serde::{Deserialize, Serialize};

/// Version stamped into every serialized [`Document`].
pub const SCHEMA_VERSION: u32 = 1;

/// One filing as exported by an EDGAR crawler: the HTML of Item 7 plus identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFiling {
    pub filing_id: String,
    #[serde(default)]
    pub company: String,
    #[serde(default)]
    pub fiscal_year: i32,
    pub item7_html: String,
    #[serde(default)]
    pub source_path: String,
}

/// Half-open byte range into the text of the owning paragraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn shift(&self, by: usize) -> Span {
        Span::new(self.start + by, self.end + by)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    pub raw_text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub cells: Vec<Cell>,
    /// Remark line immediately preceding the table, typically a units note.
    #[serde(default)]
    pub preamble: String,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.cells.iter().map(|c| c.row + 1).max().unwrap_or(0)
    }

    /// Cells grouped by row, each row in column order.
    pub fn rows(&self) -> Vec<Vec<&Cell>> {
        let mut rows: Vec<Vec<&Cell>> = vec![Vec::new(); self.n_rows()];
        for cell in &self.cells {
            rows[cell.row].push(cell);
        }
        for row in &mut rows {
            row.sort_by_key(|c| c.col);
        }
        rows
    }

    /// Raw cell text joined in row-major order. This is what the alignment
    /// matcher and the token budget see for a table.
    pub fn row_major_text(&self) -> String {
        let mut cells: Vec<&Cell> = self.cells.iter().collect();
        cells.sort_by_key(|c| (c.row, c.col));
        cells
            .iter()
            .map(|c| c.raw_text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Human-readable rendering: one line per row, non-empty cells separated by ` | `.
    pub fn render(&self) -> String {
        self.rows()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.raw_text.trim())
                    .filter(|t| !t.is_empty())
                    .collect::<Vec<_>>()
                    .join(" | ")
            })
            .filter(|line| !line.is_empty())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn is_blank(&self) -> bool {
        self.cells.iter().all(|c| c.raw_text.trim().is_empty())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParagraphKind {
    Prose,
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParagraphBody {
    Prose { text: String },
    Table { table: Table },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub index: usize,
    #[serde(flatten)]
    pub body: ParagraphBody,
}

impl Paragraph {
    pub fn prose(index: usize, text: impl Into<String>) -> Self {
        Self {
            index,
            body: ParagraphBody::Prose { text: text.into() },
        }
    }

    pub fn table(index: usize, table: Table) -> Self {
        Self {
            index,
            body: ParagraphBody::Table { table },
        }
    }

    pub fn kind(&self) -> ParagraphKind {
        match self.body {
            ParagraphBody::Prose { .. } => ParagraphKind::Prose,
            ParagraphBody::Table { .. } => ParagraphKind::Table,
        }
    }

    pub fn prose_text(&self) -> Option<&str> {
        match &self.body {
            ParagraphBody::Prose { text } => Some(text),
            ParagraphBody::Table { .. } => None,
        }
    }

    pub fn as_table(&self) -> Option<&Table> {
        match &self.body {
            ParagraphBody::Table { table } => Some(table),
            ParagraphBody::Prose { .. } => None,
        }
    }

    /// Text used for rendering prompts and counting words.
    pub fn display_text(&self) -> String {
        match &self.body {
            ParagraphBody::Prose { text } => text.clone(),
            ParagraphBody::Table { table } => table.render(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// Position among all sentences of the document.
    pub index: usize,
    pub paragraph_index: usize,
    /// Byte range into the owning paragraph's text.
    pub char_span: Span,
    pub tokens: Vec<Token>,
    /// Casefolded tokens with stopwords removed.
    pub content_tokens: Vec<Token>,
}

impl Sentence {
    pub fn content_words(&self) -> Vec<&str> {
        self.content_tokens.iter().map(|t| t.text.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: u32,
    pub filing_id: String,
    pub paragraphs: Vec<Paragraph>,
    #[serde(default)]
    pub sentences: Vec<Sentence>,
    #[serde(default)]
    pub total_content_tokens: usize,
}

impl Document {
    /// An unsegmented document from already-split paragraphs.
    pub fn new(filing_id: impl Into<String>, paragraphs: Vec<ParagraphBody>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            filing_id: filing_id.into(),
            paragraphs: paragraphs
                .into_iter()
                .enumerate()
                .map(|(index, body)| Paragraph { index, body })
                .collect(),
            sentences: Vec::new(),
            total_content_tokens: 0,
        }
    }

    /// A prose-only document from plain text; blank lines separate paragraphs
    /// and single newlines are kept as hard sentence breaks. Used for summaries.
    pub fn from_plain_text(id: impl Into<String>, text: &str) -> Self {
        let mut paragraphs = Vec::new();
        let mut current: Vec<&str> = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                if !current.is_empty() {
                    paragraphs.push(ParagraphBody::Prose {
                        text: current.join("\n"),
                    });
                    current.clear();
                }
            } else {
                current.push(line.trim_end());
            }
        }
        if !current.is_empty() {
            paragraphs.push(ParagraphBody::Prose {
                text: current.join("\n"),
            });
        }
        Self::new(id, paragraphs)
    }

    pub fn sentence_text(&self, sentence: &Sentence) -> &str {
        let text = self.paragraphs[sentence.paragraph_index]
            .prose_text()
            .expect("sentences belong to prose paragraphs");
        &text[sentence.char_span.start..sentence.char_span.end]
    }

    pub fn sentences_of(&self, paragraph_index: usize) -> impl Iterator<Item = &Sentence> {
        self.sentences
            .iter()
            .filter(move |s| s.paragraph_index == paragraph_index)
    }

    pub fn tables(&self) -> impl Iterator<Item = (usize, &Table)> {
        self.paragraphs
            .iter()
            .filter_map(|p| p.as_table().map(|t| (p.index, t)))
    }

    /// Whole document as text: paragraphs separated by blank lines, tables
    /// rendered row by row.
    pub fn plain_text(&self) -> String {
        self.paragraphs
            .iter()
            .map(Paragraph::display_text)
            .collect::<Vec<_>>()
            .join("\n\n")
    }

    /// Whitespace-delimited word counts of prose and of table cells.
    pub fn word_counts(&self) -> (usize, usize) {
        let mut prose = 0;
        let mut table = 0;
        for p in &self.paragraphs {
            match &p.body {
                ParagraphBody::Prose { text } => prose += super::word_count(text),
                ParagraphBody::Table { table: t } => {
                    table += t
                        .cells
                        .iter()
                        .map(|c| super::word_count(&c.raw_text))
                        .sum::<usize>()
                }
            }
        }
        (prose, table)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(json: &str) -> serde_json::Result<Self> {
        serde_json::from_str(json)
    }
}
