use std::str::FromStr;

use fancy_regex::Regex as FancyRegex;
use once_cell::sync::Lazy;
use regex::Regex;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, ParagraphBody, Span, Table};

pub const DATE_PATTERN: &str = r"(January|February|March|April|May|June|July|August|September|October|November|December) \d{1,2},";
pub const TABLE_INDEX_PATTERN: &str = r"Table \d+:";
pub const TARGET_PATTERN: &str = r"(?<!\d)(?<![a-zA-Z-])\d{1,3}(?![a-jln-zA-JLN-Z\d])(?:,\d{3})*(?:\.\d+)?";

static TARGET_RE: Lazy<FancyRegex> = Lazy::new(|| FancyRegex::new(TARGET_PATTERN).unwrap());
static DATE_RE: Lazy<Regex> = Lazy::new(|| Regex::new(DATE_PATTERN).unwrap());
static TABLE_INDEX_RE: Lazy<Regex> = Lazy::new(|| Regex::new(TABLE_INDEX_PATTERN).unwrap());
static UNIT_NOTE_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)\bin\s+(thousands|millions|billions)\b").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    None,
    Thousand,
    Million,
    Billion,
    Percent,
}

impl Scale {
    /// Factor applied to the literal value; percentages are kept as-is and
    /// compared only with each other.
    pub fn multiplier(self) -> Decimal {
        match self {
            Scale::None | Scale::Percent => Decimal::ONE,
            Scale::Thousand => Decimal::from(1_000),
            Scale::Million => Decimal::from(1_000_000),
            Scale::Billion => Decimal::from(1_000_000_000),
        }
    }

    fn from_word(word: &str) -> Option<Scale> {
        match word.to_ascii_lowercase().as_str() {
            "thousand" | "thousands" => Some(Scale::Thousand),
            "million" | "millions" => Some(Scale::Million),
            "billion" | "billions" => Some(Scale::Billion),
            "percent" => Some(Scale::Percent),
            _ => None,
        }
    }
}

/// Where a mention's scale came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSource {
    None,
    PercentSign,
    Word,
    /// A bare `k`/`m` letter glued to the number. The target pattern lets
    /// these through; such mentions are flagged for review.
    Suffix,
    /// Inherited from a table's units note.
    TableNote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Container {
    Prose {
        paragraph_index: usize,
        sentence_index: usize,
    },
    TableCell {
        paragraph_index: usize,
        row: usize,
        col: usize,
    },
    /// Free text with no document structure.
    Text,
}

impl Container {
    pub fn paragraph_index(&self) -> Option<usize> {
        match *self {
            Container::Prose { paragraph_index, .. } | Container::TableCell { paragraph_index, .. } => {
                Some(paragraph_index)
            }
            Container::Text => None,
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self, Container::TableCell { .. })
    }
}

/// A number found in text. `char_span` indexes the paragraph text for prose,
/// the cell's raw text for table cells, and the input string otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NumericMention {
    pub raw_text: String,
    pub value: Decimal,
    pub scale: Scale,
    pub scale_source: ScaleSource,
    pub char_span: Span,
    pub container: Container,
}

impl NumericMention {
    /// Value times scale multiplier; `None` when that overflows.
    pub fn magnitude(&self) -> Option<Decimal> {
        self.value.checked_mul(self.scale.multiplier())
    }

    pub fn is_percent(&self) -> bool {
        self.scale == Scale::Percent
    }

    pub fn flagged(&self) -> bool {
        self.scale_source == ScaleSource::Suffix
    }

    /// Sort key for document order.
    pub fn position(&self) -> (usize, Container, Span) {
        (self.container.paragraph_index().unwrap_or(0), self.container, self.char_span)
    }
}

fn parse_value(raw: &str) -> Option<Decimal> {
    Decimal::from_str(&raw.replace(',', "")).ok()
}

fn excluded_spans(text: &str) -> Vec<Span> {
    DATE_RE
        .find_iter(text)
        .chain(TABLE_INDEX_RE.find_iter(text))
        .map(|m| Span::new(m.start(), m.end()))
        .collect()
}

fn infer_scale(rest: &str) -> (Scale, ScaleSource) {
    let trimmed = rest.strip_prefix(' ').unwrap_or(rest);
    if trimmed.starts_with('%') {
        return (Scale::Percent, ScaleSource::PercentSign);
    }
    let mut chars = rest.chars();
    if let Some(c @ ('k' | 'K' | 'm' | 'M')) = chars.next() {
        if !chars.next().is_some_and(char::is_alphanumeric) {
            let scale = if c.eq_ignore_ascii_case(&'k') {
                Scale::Thousand
            } else {
                Scale::Million
            };
            return (scale, ScaleSource::Suffix);
        }
    }
    // Up to two words, stopping at digits, line breaks and clause punctuation.
    let mut words = 0;
    let mut word = String::new();
    for c in rest.chars().chain(std::iter::once(' ')) {
        if c.is_alphabetic() {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            if let Some(scale) = Scale::from_word(&word) {
                return (scale, ScaleSource::Word);
            }
            words += 1;
            word.clear();
            if words == 2 {
                break;
            }
        }
        if c.is_ascii_digit() || matches!(c, '\n' | '.' | ',' | ';' | ':' | '!' | '?' | '(' | ')' | '%') {
            break;
        }
    }
    (Scale::None, ScaleSource::None)
}

/// All numbers in `text`, with spans into `text` and a `Text` container.
///
/// Matches of the target pattern overlapping a date or a `Table N:` index are
/// dropped. Values too large for an exact decimal are skipped.
pub fn extract_numbers(text: &str) -> Vec<NumericMention> {
    extract_in(text, Container::Text)
}

fn extract_in(text: &str, container: Container) -> Vec<NumericMention> {
    let excluded = excluded_spans(text);
    let mut out = Vec::new();
    for m in TARGET_RE.find_iter(text) {
        let m = match m {
            Ok(m) => m,
            Err(e) => {
                tracing::warn!("number pattern aborted: {e}");
                break;
            }
        };
        let span = Span::new(m.start(), m.end());
        if excluded.iter().any(|x| x.overlaps(&span)) {
            continue;
        }
        let Some(value) = parse_value(m.as_str()) else {
            tracing::debug!("skipping unrepresentable number {}", m.as_str());
            continue;
        };
        let (scale, scale_source) = infer_scale(&text[m.end()..]);
        out.push(NumericMention {
            raw_text: m.as_str().to_string(),
            value,
            scale,
            scale_source,
            char_span: span,
            container,
        });
    }
    out
}

/// The unit a table declares in its preamble, or failing that in a cell.
pub fn table_scale(table: &Table) -> Option<Scale> {
    std::iter::once(table.preamble.as_str())
        .chain(table.cells.iter().map(|c| c.raw_text.as_str()))
        .find_map(|text| UNIT_NOTE_RE.captures(text))
        .and_then(|c| Scale::from_word(&c[1]))
}

/// Numbers in every prose paragraph, tagged with their sentence.
pub fn extract_prose_numbers(doc: &Document) -> Vec<NumericMention> {
    let mut out = Vec::new();
    for p in &doc.paragraphs {
        let ParagraphBody::Prose { text } = &p.body else {
            continue;
        };
        let sentences: Vec<_> = doc.sentences_of(p.index).collect();
        for mut m in extract_in(text, Container::Text) {
            // A number between sentences goes with the one before it.
            let sentence_index = sentences
                .iter()
                .rev()
                .find(|s| s.char_span.start <= m.char_span.start)
                .or(sentences.first())
                .map(|s| s.index)
                .unwrap_or(0);
            m.container = Container::Prose {
                paragraph_index: p.index,
                sentence_index,
            };
            out.push(m);
        }
    }
    out
}

/// Numbers in every table cell. Cells without their own unit inherit the
/// table's declared unit.
pub fn extract_table_numbers(doc: &Document) -> Vec<NumericMention> {
    let mut out = Vec::new();
    for (paragraph_index, table) in doc.tables() {
        let inherited = table_scale(table);
        for cell in &table.cells {
            let container = Container::TableCell {
                paragraph_index,
                row: cell.row,
                col: cell.col,
            };
            for mut m in extract_in(&cell.raw_text, container) {
                if let (Scale::None, Some(scale)) = (m.scale, inherited) {
                    m.scale = scale;
                    m.scale_source = ScaleSource::TableNote;
                }
                out.push(m);
            }
        }
    }
    out
}

/// Prose and table numbers in document order.
pub fn extract_document_numbers(doc: &Document) -> Vec<NumericMention> {
    let mut all = extract_prose_numbers(doc);
    all.extend(extract_table_numbers(doc));
    all.sort_by_key(NumericMention::position);
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{segment_and_tokenize, Cell, StopwordList};

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn values(text: &str) -> Vec<(Decimal, Scale)> {
        extract_numbers(text).into_iter().map(|m| (m.value, m.scale)).collect()
    }

    #[test]
    fn dates_and_entity_names_are_excluded() {
        assert!(values("December 31, 2022").is_empty());
        assert!(values("COVID-19 and ATA190").is_empty());
        assert!(values("see Table 3: results").is_empty());
    }

    #[test]
    fn money_and_percent() {
        assert_eq!(
            values("revenue of $1,234.56 million, up 15.4%"),
            [(d("1234.56"), Scale::Million), (d("15.4"), Scale::Percent)]
        );
    }

    #[test]
    fn four_digit_runs_never_match() {
        assert!(values("in 2018 and 12345").is_empty());
    }

    #[test]
    fn scale_words_within_two_tokens() {
        assert_eq!(values("$2.9 billion"), [(d("2.9"), Scale::Billion)]);
        assert_eq!(values("98.0 million"), [(d("98.0"), Scale::Million)]);
        assert_eq!(values("5 percent"), [(d("5"), Scale::Percent)]);
        assert_eq!(values("12 net new millions"), [(d("12"), Scale::None)]);
        assert_eq!(values("12 (in millions)"), [(d("12"), Scale::None)]);
        assert_eq!(values("7 and 3 million"), [(d("7"), Scale::None), (d("3"), Scale::Million)]);
        assert_eq!(values("4\nmillion"), [(d("4"), Scale::None)]);
    }

    #[test]
    fn suffixes_are_scaled_and_flagged() {
        let ms = extract_numbers("about 1M users and 10k stores");
        assert_eq!(ms[0].value, d("1"));
        assert_eq!(ms[0].scale, Scale::Million);
        assert!(ms[0].flagged());
        assert_eq!(ms[1].scale, Scale::Thousand);
        assert!(values("5km").iter().all(|(_, s)| *s == Scale::None));
    }

    #[test]
    fn spans_point_at_raw_text() {
        let text = "up 15.4% to $72,616";
        for m in extract_numbers(text) {
            assert_eq!(&text[m.char_span.start..m.char_span.end], m.raw_text);
        }
    }

    fn table_doc(preamble: &str, cells: &[&str]) -> Document {
        let table = Table {
            cells: cells
                .iter()
                .enumerate()
                .map(|(i, t)| Cell { row: 0, col: i, raw_text: t.to_string() })
                .collect(),
            preamble: preamble.into(),
        };
        Document::new("t", vec![ParagraphBody::Table { table }])
    }

    #[test]
    fn table_cells_keep_coordinates_and_inherit_units() {
        let plain = extract_table_numbers(&table_doc("", &["Impairment of intangible assets\n", "144.7\n"]));
        assert_eq!(plain.len(), 1);
        assert_eq!(plain[0].value, d("144.7"));
        assert_eq!(plain[0].scale, Scale::None);
        assert_eq!(
            plain[0].container,
            Container::TableCell { paragraph_index: 0, row: 0, col: 1 }
        );

        let scaled = extract_table_numbers(&table_doc("(In thousands)", &["72,616", "3.1%"]));
        assert_eq!(scaled[0].value, d("72616"));
        assert_eq!(scaled[0].scale, Scale::Thousand);
        assert_eq!(scaled[0].scale_source, ScaleSource::TableNote);
        assert_eq!(scaled[1].scale, Scale::Percent);

        assert!(extract_table_numbers(&table_doc("", &[])).is_empty());
    }

    #[test]
    fn prose_mentions_know_their_sentence() {
        let doc = Document::new(
            "r",
            vec![ParagraphBody::Prose {
                text: "Sales were $5 million. Costs fell 3%.".into(),
            }],
        );
        let doc = segment_and_tokenize(doc, &StopwordList::english());
        let ms = extract_prose_numbers(&doc);
        let sentences: Vec<_> = ms
            .iter()
            .map(|m| match m.container {
                Container::Prose { sentence_index, .. } => sentence_index,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(sentences, [0, 1]);
    }
}
