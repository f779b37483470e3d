//! Lenient Item 7 HTML flattening.
//!
//! The html5ever tokenizer handles entity decoding and broken markup; block
//! structure is rebuilt here from tag events. Prose is whitespace-normalized,
//! table cells keep their text verbatim.

use html5ever::tendril::StrTendril;
use html5ever::tokenizer::states::RawKind;
use html5ever::tokenizer::{
    BufferQueue, Tag, TagKind, Token, TokenSink, TokenSinkResult, Tokenizer, TokenizerOpts,
};

use super::model::{Cell, Document, ParagraphBody, RawFiling, Table};
use super::segment::split_sentences;
use super::CorpusError;

/// Tables nested deeper than this are treated as unrecoverable markup.
const MAX_TABLE_NESTING: usize = 32;

const BLOCK_TAGS: &[&str] = &[
    "address", "article", "aside", "blockquote", "br", "center", "dd", "div", "dl", "dt",
    "footer", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "li", "main", "nav", "ol",
    "p", "pre", "section", "ul", "body", "html",
];

const SKIPPED_TAGS: &[&str] = &["script", "style", "head", "title", "noscript", "template"];

/// Parse a filing's Item 7 HTML into an unsegmented [`Document`].
///
/// Each `<table>` becomes one table paragraph; everything else is flattened
/// into prose paragraphs at block-element boundaries. Tables whose cells are
/// all blank (layout spacers) are dropped.
pub fn parse_filing(raw: &RawFiling) -> Result<Document, CorpusError> {
    if raw.item7_html.trim().is_empty() {
        return Err(CorpusError::EmptyDocument(raw.filing_id.clone()));
    }

    let mut tokenizer = Tokenizer::new(Flattener::default(), TokenizerOpts::default());
    let mut queue = BufferQueue::default();
    queue.push_back(StrTendril::from_slice(&raw.item7_html));
    let _ = tokenizer.feed(&mut queue);
    tokenizer.end();
    let sink = tokenizer.sink;

    if sink.overflow {
        return Err(CorpusError::MalformedHtml {
            filing_id: raw.filing_id.clone(),
            limit: MAX_TABLE_NESTING,
        });
    }

    let mut bodies = sink.paragraphs;
    attach_preambles(&mut bodies);
    if bodies.is_empty() {
        return Err(CorpusError::EmptyDocument(raw.filing_id.clone()));
    }
    Ok(Document::new(raw.filing_id.clone(), bodies))
}

fn attach_preambles(bodies: &mut [ParagraphBody]) {
    let mut last_prose_line = String::new();
    for body in bodies.iter_mut() {
        match body {
            ParagraphBody::Prose { text } => {
                last_prose_line = split_sentences(text)
                    .last()
                    .map(|span| text[span.start..span.end].to_string())
                    .unwrap_or_default();
            }
            ParagraphBody::Table { table } => table.preamble = last_prose_line.clone(),
        }
    }
}

#[derive(Default)]
struct TableBuilder {
    cells: Vec<Cell>,
    row: Option<usize>,
    next_row: usize,
    col: usize,
    cell: Option<String>,
    /// Depth of tables nested inside the current cell; their text joins the cell.
    nested: usize,
}

impl TableBuilder {
    fn close_cell(&mut self) {
        if let Some(text) = self.cell.take() {
            let row = self.current_row();
            self.cells.push(Cell {
                row,
                col: self.col,
                raw_text: text,
            });
            self.col += 1;
        }
    }

    fn current_row(&mut self) -> usize {
        match self.row {
            Some(r) => r,
            None => self.open_row(),
        }
    }

    fn open_row(&mut self) -> usize {
        self.close_cell_only();
        let r = self.next_row;
        self.next_row += 1;
        self.row = Some(r);
        self.col = 0;
        r
    }

    fn close_cell_only(&mut self) {
        if self.cell.is_some() {
            self.close_cell();
        }
    }

    fn close_row(&mut self) {
        self.close_cell();
        self.row = None;
    }

    fn finish(mut self) -> Table {
        self.close_cell();
        // Rows that were opened but held no cells leave gaps; renumber densely.
        let mut seen: Vec<usize> = self.cells.iter().map(|c| c.row).collect();
        seen.dedup();
        let mut cells = self.cells;
        for cell in &mut cells {
            cell.row = seen.iter().position(|&r| r == cell.row).unwrap_or(cell.row);
        }
        Table {
            cells,
            preamble: String::new(),
        }
    }
}

#[derive(Default)]
struct Flattener {
    paragraphs: Vec<ParagraphBody>,
    prose: String,
    table: Option<TableBuilder>,
    skip_depth: usize,
    overflow: bool,
}

impl Flattener {
    fn flush_prose(&mut self) {
        let text = self.prose.split_whitespace().collect::<Vec<_>>().join(" ");
        self.prose.clear();
        if !text.is_empty() {
            self.paragraphs.push(ParagraphBody::Prose { text });
        }
    }

    fn finish_table(&mut self) {
        if let Some(builder) = self.table.take() {
            let table = builder.finish();
            if !table.is_blank() {
                self.paragraphs.push(ParagraphBody::Table { table });
            }
        }
    }

    fn start_tag(&mut self, tag: &Tag) -> TokenSinkResult<()> {
        let name: &str = &tag.name;
        if SKIPPED_TAGS.contains(&name) {
            if !tag.self_closing {
                self.skip_depth += 1;
            }
            return match name {
                "script" => TokenSinkResult::RawData(RawKind::ScriptData),
                "style" | "noscript" => TokenSinkResult::RawData(RawKind::Rawtext),
                "title" => TokenSinkResult::RawData(RawKind::Rcdata),
                _ => TokenSinkResult::Continue,
            };
        }
        if self.skip_depth > 0 {
            return TokenSinkResult::Continue;
        }

        if let Some(table) = self.table.as_mut() {
            match name {
                "table" => {
                    table.nested += 1;
                    if table.nested > MAX_TABLE_NESTING {
                        self.overflow = true;
                    }
                }
                _ if table.nested > 0 => {
                    if let Some(cell) = table.cell.as_mut() {
                        if matches!(name, "td" | "th" | "tr" | "br") {
                            cell.push(' ');
                        }
                    }
                }
                "tr" => {
                    table.open_row();
                }
                "td" | "th" => {
                    table.close_cell_only();
                    table.current_row();
                    table.cell = Some(String::new());
                }
                "br" => {
                    if let Some(cell) = table.cell.as_mut() {
                        cell.push('\n');
                    }
                }
                _ => {}
            }
            return TokenSinkResult::Continue;
        }

        if name == "table" {
            self.flush_prose();
            self.table = Some(TableBuilder::default());
        } else if BLOCK_TAGS.contains(&name) {
            self.flush_prose();
        }
        TokenSinkResult::Continue
    }

    fn end_tag(&mut self, tag: &Tag) {
        let name: &str = &tag.name;
        if SKIPPED_TAGS.contains(&name) {
            self.skip_depth = self.skip_depth.saturating_sub(1);
            return;
        }
        if self.skip_depth > 0 {
            return;
        }
        if let Some(table) = self.table.as_mut() {
            match name {
                "table" if table.nested > 0 => table.nested -= 1,
                "table" => self.finish_table(),
                _ if table.nested > 0 => {}
                "td" | "th" => table.close_cell(),
                "tr" => table.close_row(),
                _ => {}
            }
            return;
        }
        if BLOCK_TAGS.contains(&name) {
            self.flush_prose();
        }
    }

    fn characters(&mut self, text: &str) {
        if self.skip_depth > 0 {
            return;
        }
        match self.table.as_mut() {
            Some(table) => {
                if let Some(cell) = table.cell.as_mut() {
                    cell.push_str(text);
                }
            }
            None => self.prose.push_str(text),
        }
    }
}

impl TokenSink for Flattener {
    type Handle = ();

    fn process_token(&mut self, token: Token, _line: u64) -> TokenSinkResult<()> {
        match token {
            Token::TagToken(tag) => match tag.kind {
                TagKind::StartTag => return self.start_tag(&tag),
                TagKind::EndTag => self.end_tag(&tag),
            },
            Token::CharacterTokens(text) => self.characters(&text),
            Token::EOFToken => {
                self.finish_table();
                self.flush_prose();
            }
            _ => {}
        }
        TokenSinkResult::Continue
    }
}
