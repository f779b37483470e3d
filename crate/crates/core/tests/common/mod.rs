#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumtrace_core::corpus::{segment_and_tokenize, Cell, Document, ParagraphBody, StopwordList, Table};

pub const WORDS: &[&str] = &[
    "revenue", "growth", "margin", "cash", "operating", "segment", "customers", "pricing", "costs",
    "inventory", "debt", "capital", "market", "demand", "services", "products", "expenses", "income",
    "royalty", "franchise", "lease", "tax", "interest", "volume",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A sentence carrying a marker word no other sentence shares.
pub fn sentence(rng: &mut ChaCha8Rng, marker: usize) -> String {
    let n = rng.gen_range(3..9);
    let mut words: Vec<String> = (0..n).map(|_| WORDS.choose(rng).unwrap().to_string()).collect();
    words.insert(rng.gen_range(0..=n), format!("m{marker}x"));
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    s.push('.');
    s
}

pub fn table(rng: &mut ChaCha8Rng, tag: usize) -> Table {
    let rows = rng.gen_range(1..4);
    let cols = rng.gen_range(1..4);
    let mut cells = Vec::new();
    for row in 0..rows {
        for col in 0..cols {
            let raw_text = if col == 0 {
                format!("{} t{tag}r{row}\n", WORDS.choose(rng).unwrap())
            } else {
                format!("{}.{}", rng.gen_range(1..999), rng.gen_range(0..10))
            };
            cells.push(Cell { row, col, raw_text });
        }
    }
    Table {
        cells,
        preamble: String::new(),
    }
}

/// Random prose/table document, unsegmented.
pub fn random_doc(rng: &mut ChaCha8Rng, id: &str, max_paragraphs: usize) -> Document {
    let n = rng.gen_range(1..=max_paragraphs);
    let mut marker = 0;
    let mut bodies = Vec::new();
    for p in 0..n {
        if rng.gen_bool(0.25) {
            bodies.push(ParagraphBody::Table { table: table(rng, p) });
        } else {
            let k = rng.gen_range(1..4);
            let text = (0..k)
                .map(|_| {
                    marker += 1;
                    sentence(rng, marker)
                })
                .collect::<Vec<_>>()
                .join(" ");
            bodies.push(ParagraphBody::Prose { text });
        }
    }
    Document::new(id, bodies)
}

pub fn segmented(doc: Document) -> Document {
    segment_and_tokenize(doc, &StopwordList::english())
}
