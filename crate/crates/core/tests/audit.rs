mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use rust_decimal::Decimal;
use sumtrace_core::audit::{
    extract_candidates, hallucination_stats, AnnotationRecord, AnnotationStore, AuditError, HallucinationLabel,
    MentionRef, QuoteLocation, StatsFilter, STORE_SCHEMA_VERSION,
};
use sumtrace_core::corpus::{split_sentences, Cell, Document, ParagraphBody, Span, Table};
use sumtrace_core::numerics::{extract_numbers, numbers_match, NumberIndex};

fn report(rng: &mut rand_chacha::ChaCha8Rng) -> Document {
    let pool = ["1,000,000", "1M", "89%", "89", "144.7", "$2.9 billion", "2,900 million", "12"];
    let mut bodies = Vec::new();
    for p in 0..rng.gen_range(1..6) {
        if p % 2 == 1 {
            let cells = (0..rng.gen_range(1..4))
                .flat_map(|row| {
                    let v = pool.choose(rng).unwrap().to_string();
                    [Cell { row, col: 0, raw_text: format!("Item {row}\n") }, Cell { row, col: 1, raw_text: v }]
                })
                .collect();
            bodies.push(ParagraphBody::Table { table: Table { cells, preamble: String::new() } });
        } else {
            let text = (0..rng.gen_range(1..4))
                .map(|_| format!("Users reached {} and {}.", pool.choose(rng).unwrap(), pool.choose(rng).unwrap()))
                .collect::<Vec<_>>()
                .join(" ");
            bodies.push(ParagraphBody::Prose { text });
        }
    }
    common::segmented(Document::new("r", bodies))
}

#[test]
fn candidates_are_complete_and_ordered() {
    for seed in 0..100 {
        let mut rng = common::rng(seed);
        let doc = report(&mut rng);
        let index = NumberIndex::build(&doc);
        for q in ["1,000,000", "89%", "89", "144", "$2.9 billion", "12", "7"] {
            let value = extract_numbers(q).remove(0);
            // Brute force: re-split every prose paragraph and scan every cell.
            let mut want = Vec::new();
            let mut sentence_index = 0;
            for p in &doc.paragraphs {
                match &p.body {
                    ParagraphBody::Prose { text } => {
                        for span in split_sentences(text) {
                            if extract_numbers(&text[span.start..span.end]).iter().any(|m| numbers_match(m, &value)) {
                                want.push(QuoteLocation::Sentence { paragraph_index: p.index, sentence_index });
                            }
                            sentence_index += 1;
                        }
                    }
                    ParagraphBody::Table { table } => {
                        for c in &table.cells {
                            if extract_numbers(&c.raw_text).iter().any(|m| numbers_match(m, &value)) {
                                want.push(QuoteLocation::Cell { paragraph_index: p.index, row: c.row, col: c.col });
                            }
                        }
                    }
                }
            }
            let got: Vec<_> = extract_candidates(&value, &doc, &index).iter().map(|c| c.location).collect();
            assert_eq!(got, want, "seed {seed} query {q}");
            let unique: BTreeSet<_> = got.iter().collect();
            assert_eq!(unique.len(), got.len());
        }
    }
}

fn record(i: usize, label: HallucinationLabel, model: &str) -> AnnotationRecord {
    AnnotationRecord {
        schema_version: STORE_SCHEMA_VERSION,
        summary_id: format!("s{}", i / 10),
        mention: MentionRef { paragraph_index: 0, sentence_index: i % 10, span: Span::new(0, 2) },
        model: model.into(),
        prompt: "simple".into(),
        summary_sentence_text: "Net income was $39 million.".into(),
        value: Decimal::from(39),
        raw_value: "39".into(),
        candidates: Vec::new(),
        label,
        evidence_quote: (label == HallucinationLabel::NoHallucination).then(|| "net income of $39 million".into()),
        comment: if label.is_hallucination() { "no source in report".into() } else { String::new() },
        annotator: "lead".into(),
        revision: 1,
        timestamp: DateTime::<Utc>::UNIX_EPOCH,
    }
}

#[test]
fn two_hundred_forty_seven_numbers() {
    use HallucinationLabel::*;
    let mut labels = vec![FabricatedNumber; 2];
    labels.extend([ArithmeticError; 3]);
    labels.extend([RoundingError; 1]);
    labels.extend([ContextMismatch; 6]);
    labels.resize(247, NoHallucination);
    let records: Vec<_> = labels.iter().enumerate().map(|(i, l)| record(i, *l, "claude-2.0")).collect();
    let s = hallucination_stats(&records, &StatsFilter::default()).unwrap();
    let shown: Vec<String> = [FabricatedNumber, ArithmeticError, RoundingError, ContextMismatch]
        .iter()
        .map(|l| format!("{:.2}", s.percent(*l)))
        .collect();
    assert_eq!(shown, ["0.81", "1.21", "0.40", "2.43"]);
    let hand_sum = (2.0 + 3.0 + 1.0 + 6.0) * 100.0 / 247.0;
    assert!((s.total_rate - hand_sum).abs() < 1e-12);
    assert_eq!(s.hallucinated(), 12);
    let counted: usize = s.counts.values().sum();
    assert_eq!(counted, s.annotated);
}

#[test]
fn concurrent_writers_at_the_same_revision() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(AnnotationStore::open(dir.path().join("a.jsonl")).unwrap());
    let results: Vec<_> = (0..8)
        .map(|_| {
            let store = store.clone();
            std::thread::spawn(move || store.record(record(0, HallucinationLabel::ContextMismatch, "m")))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|h| h.join().unwrap())
        .collect();
    assert_eq!(results.iter().filter(|r| r.is_ok()).count(), 1);
    assert!(results
        .iter()
        .filter_map(|r| r.as_ref().err())
        .all(|e| *e == AuditError::StaleRevision { expected: 2, got: 1 }));
    let lines = std::fs::read_to_string(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 1);
}

#[test]
fn log_replay_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.jsonl");
    let store = AnnotationStore::open(&path).unwrap();
    for i in 0..30 {
        let label = [HallucinationLabel::NoHallucination, HallucinationLabel::RoundingError][i % 2];
        store.record(record(i, label, "gpt-4")).unwrap();
    }
    let mut r = record(3, HallucinationLabel::ContextMismatch, "gpt-4");
    r.revision = 2;
    store.record(r.clone()).unwrap();
    let snapshot = store.snapshot();
    drop(store);
    let reopened = AnnotationStore::open(&path).unwrap();
    assert_eq!(reopened.snapshot(), snapshot);
    assert_eq!(reopened.get(&r.key()), Some(r));
}
