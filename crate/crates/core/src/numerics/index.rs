use std::collections::HashMap;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::extract::{extract_prose_numbers, extract_table_numbers, NumericMention, Scale};
use crate::corpus::Document;

/// Equality class of a mention under [`numbers_match`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchKey {
    Percent(Decimal),
    Magnitude(Decimal),
    /// Magnitude overflowed; falls back to the literal value and scale.
    Literal(Decimal, Scale),
}

impl MatchKey {
    pub fn of(m: &NumericMention) -> Self {
        // Decimal's Eq and Hash already ignore trailing zeros.
        if m.is_percent() {
            return MatchKey::Percent(m.value);
        }
        match m.magnitude() {
            Some(v) => MatchKey::Magnitude(v),
            None => MatchKey::Literal(m.value, m.scale),
        }
    }
}

/// Exact equality of scaled magnitudes; a percentage only matches another
/// percentage.
pub fn numbers_match(a: &NumericMention, b: &NumericMention) -> bool {
    MatchKey::of(a) == MatchKey::of(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SourceType {
    /// Prose only.
    A,
    /// Tables only.
    B,
    /// Both.
    C,
    /// Neither.
    D,
}

impl SourceType {
    pub const ALL: [SourceType; 4] = [SourceType::A, SourceType::B, SourceType::C, SourceType::D];

    pub fn from_presence(in_prose: bool, in_table: bool) -> Self {
        match (in_prose, in_table) {
            (true, false) => SourceType::A,
            (false, true) => SourceType::B,
            (true, true) => SourceType::C,
            (false, false) => SourceType::D,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Presence {
    prose: bool,
    table: bool,
}

/// Every number of one report, in document order, with a lookup by
/// [`MatchKey`].
#[derive(Debug, Clone)]
pub struct NumberIndex {
    pub filing_id: String,
    mentions: Vec<NumericMention>,
    keys: HashMap<MatchKey, Presence>,
}

impl NumberIndex {
    pub fn build(report: &Document) -> Self {
        let mut mentions = extract_prose_numbers(report);
        mentions.extend(extract_table_numbers(report));
        Self::from_mentions(&report.filing_id, mentions)
    }

    pub fn from_mentions(filing_id: &str, mut mentions: Vec<NumericMention>) -> Self {
        mentions.sort_by_key(NumericMention::position);
        let mut keys: HashMap<MatchKey, Presence> = HashMap::new();
        for m in &mentions {
            let p = keys.entry(MatchKey::of(m)).or_default();
            if m.container.is_table() {
                p.table = true;
            } else {
                p.prose = true;
            }
        }
        Self {
            filing_id: filing_id.to_string(),
            mentions,
            keys,
        }
    }

    pub fn mentions(&self) -> &[NumericMention] {
        &self.mentions
    }

    /// Report mentions equal to `m` under [`numbers_match`], in document order.
    pub fn matches<'a>(&'a self, m: &'a NumericMention) -> impl Iterator<Item = &'a NumericMention> {
        let key = MatchKey::of(m);
        let present = self.keys.contains_key(&key);
        self.mentions
            .iter()
            .filter(move |r| present && MatchKey::of(r) == key)
    }

    pub fn source_type(&self, m: &NumericMention) -> SourceType {
        let p = self.keys.get(&MatchKey::of(m)).copied().unwrap_or_default();
        SourceType::from_presence(p.prose, p.table)
    }

    /// Number of mentions, with repeats.
    pub fn raw_count(&self) -> usize {
        self.mentions.len()
    }

    /// Number of distinct values under [`numbers_match`].
    pub fn distinct_count(&self) -> usize {
        self.keys.len()
    }

    pub fn prose_count(&self) -> usize {
        self.mentions.iter().filter(|m| !m.container.is_table()).count()
    }

    pub fn table_count(&self) -> usize {
        self.mentions.iter().filter(|m| m.container.is_table()).count()
    }
}

/// A: matched in prose only, B: tables only, C: both, D: neither.
pub fn classify_source_type(m: &NumericMention, index: &NumberIndex) -> SourceType {
    index.source_type(m)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeCounts {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl TypeCounts {
    pub fn add(&mut self, t: SourceType) {
        match t {
            SourceType::A => self.a += 1,
            SourceType::B => self.b += 1,
            SourceType::C => self.c += 1,
            SourceType::D => self.d += 1,
        }
    }

    pub fn get(&self, t: SourceType) -> usize {
        match t {
            SourceType::A => self.a,
            SourceType::B => self.b,
            SourceType::C => self.c,
            SourceType::D => self.d,
        }
    }

    pub fn total(&self) -> usize {
        self.a + self.b + self.c + self.d
    }

    /// Share of `t` in percent; zero when there are no mentions.
    pub fn percent(&self, t: SourceType) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.get(t) as f64 * 100.0 / n as f64,
        }
    }
}

impl FromIterator<SourceType> for TypeCounts {
    fn from_iter<I: IntoIterator<Item = SourceType>>(iter: I) -> Self {
        let mut counts = TypeCounts::default();
        for t in iter {
            counts.add(t);
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{segment_and_tokenize, Cell, ParagraphBody, StopwordList, Table};
    use crate::numerics::extract_numbers;

    fn one(text: &str) -> NumericMention {
        let mut ms = extract_numbers(text);
        assert_eq!(ms.len(), 1, "{text}");
        ms.remove(0)
    }

    #[test]
    fn format_variants_match() {
        assert!(numbers_match(&one("1,000,000"), &one("1M")));
        assert!(numbers_match(&one("$2.9 billion"), &one("2.9 billion")));
        assert!(numbers_match(&one("98.0 million"), &one("98 million")));
        assert!(numbers_match(&one("1.5 billion"), &one("1,500 million")));
    }

    #[test]
    fn units_must_agree() {
        assert!(!numbers_match(&one("15.4%"), &one("15.4 million")));
        assert!(!numbers_match(&one("15.4%"), &one("15.4")));
        assert!(!numbers_match(&one("2.9 billion"), &one("2.9")));
    }

    fn report() -> Document {
        let table = Table {
            cells: vec![
                Cell { row: 0, col: 0, raw_text: "Impairment of intangible assets\n".into() },
                Cell { row: 0, col: 1, raw_text: "144.7\n".into() },
                Cell { row: 1, col: 0, raw_text: "Other".into() },
                Cell { row: 1, col: 1, raw_text: "42".into() },
            ],
            preamble: String::new(),
        };
        let doc = Document::new(
            "r",
            vec![
                ParagraphBody::Prose {
                    text: "We had an accumulated deficit of $112.3 million. Other items were 42.".into(),
                },
                ParagraphBody::Table { table },
            ],
        );
        segment_and_tokenize(doc, &StopwordList::english())
    }

    #[test]
    fn source_types() {
        let index = NumberIndex::build(&report());
        assert_eq!(classify_source_type(&one("$112.3 million"), &index), SourceType::A);
        assert_eq!(classify_source_type(&one("144.7"), &index), SourceType::B);
        assert_eq!(classify_source_type(&one("42"), &index), SourceType::C);
        assert_eq!(classify_source_type(&one("144"), &index), SourceType::D);
        assert_eq!(index.raw_count(), 4);
        assert_eq!(index.distinct_count(), 3);
        assert_eq!((index.prose_count(), index.table_count()), (2, 2));
    }

    #[test]
    fn matches_in_document_order() {
        let index = NumberIndex::build(&report());
        let q = one("42");
        let hits: Vec<_> = index.matches(&q).map(|m| m.container.is_table()).collect();
        assert_eq!(hits, [false, true]);
    }

    #[test]
    fn counts_and_percent() {
        let c: TypeCounts = [SourceType::A, SourceType::D, SourceType::D, SourceType::B]
            .into_iter()
            .collect();
        assert_eq!(c.total(), 4);
        assert_eq!(c.percent(SourceType::D), 50.0);
        assert_eq!(TypeCounts::default().percent(SourceType::A), 0.0);
    }
}
