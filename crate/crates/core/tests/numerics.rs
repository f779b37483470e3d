mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use sumtrace_core::corpus::{word_count, Cell, Document, ParagraphBody, Table};
use sumtrace_core::numerics::{
    classify_source_type, density, explain_type_d, extract_numbers, numbers_match, Container, Locality,
    MatchKey, NumberIndex, SourceType, TypeCounts,
};

fn number_text() -> impl Strategy<Value = String> {
    let digits = prop_oneof![
        (1u32..1000).prop_map(|n| n.to_string()),
        (1u32..1000, 0u32..1000).prop_map(|(a, b)| format!("{a},{b:03}")),
        (1u32..1000, 0u32..100).prop_map(|(a, b)| format!("{a}.{b}")),
    ];
    let unit = prop_oneof![
        Just(""),
        Just("%"),
        Just(" million"),
        Just(" billion"),
        Just(" thousand"),
        Just("M"),
        Just("k"),
    ];
    (digits, unit).prop_map(|(d, u)| format!("{d}{u}"))
}

fn filler() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            Just("revenue"), Just("rose"), Just("to"), Just("$"), Just("COVID-19"), Just("in"),
            Just("2021"), Just("December 31, 2020"), Just("Table 4:"), Just("FY22"), Just(","),
        ],
        0..6,
    )
    .prop_map(|w| w.join(" "))
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec((filler(), number_text()), 0..6).prop_map(|parts| {
        parts
            .into_iter()
            .map(|(f, n)| format!("{f} {n}"))
            .collect::<Vec<_>>()
            .join(" ")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn spans_ordered_and_disjoint(t in text()) {
        let ms = extract_numbers(&t);
        for pair in ms.windows(2) {
            prop_assert!(pair[0].char_span.end <= pair[1].char_span.start);
        }
        for m in &ms {
            prop_assert_eq!(&t[m.char_span.start..m.char_span.end], m.raw_text.as_str());
            prop_assert_eq!(m.value, m.raw_text.replace(',', "").parse().unwrap());
        }
    }

    #[test]
    fn concatenation_is_union_with_shifted_spans(a in text(), b in text()) {
        let joined = format!("{a}\n{b}");
        let mut expected = extract_numbers(&a);
        let offset = a.len() + 1;
        expected.extend(extract_numbers(&b).into_iter().map(|mut m| {
            m.char_span = m.char_span.shift(offset);
            m
        }));
        prop_assert_eq!(extract_numbers(&joined), expected);
    }

    #[test]
    fn matching_is_reflexive_and_symmetric(a in number_text(), b in number_text()) {
        let ma = extract_numbers(&a);
        let mb = extract_numbers(&b);
        prop_assume!(ma.len() == 1 && mb.len() == 1);
        prop_assert!(numbers_match(&ma[0], &ma[0]));
        prop_assert_eq!(numbers_match(&ma[0], &mb[0]), numbers_match(&mb[0], &ma[0]));
        // Canonicalization is idempotent: the key of a re-extracted canonical
        // rendering equals the original key.
        if let MatchKey::Magnitude(v) = MatchKey::of(&ma[0]) {
            let again = extract_numbers(&v.normalize().to_string());
            if again.len() == 1 && MatchKey::of(&again[0]) == MatchKey::of(&ma[0]) {
                prop_assert!(numbers_match(&again[0], &ma[0]));
            }
        }
    }

    #[test]
    fn density_recovers_the_count(t in text()) {
        let words = word_count(&t);
        prop_assume!(words > 0);
        let d = density(&t).unwrap();
        let recovered = d * words as f64 / 100.0;
        prop_assert_eq!(recovered.round() as usize, extract_numbers(&t).len());
        prop_assert!((recovered - recovered.round()).abs() < 1e-9);
    }
}

/// Report with prose and table numbers drawn from a small pool so that
/// values repeat across containers.
fn planted_report(rng: &mut rand_chacha::ChaCha8Rng, pool: &[&str]) -> Document {
    let mut bodies = Vec::new();
    for p in 0..rng.gen_range(2..6) {
        if p % 2 == 1 {
            let cells = (0..rng.gen_range(1..5))
                .map(|col| Cell {
                    row: 0,
                    col,
                    raw_text: pool.choose(rng).unwrap().to_string(),
                })
                .collect();
            bodies.push(ParagraphBody::Table {
                table: Table {
                    cells,
                    preamble: String::new(),
                },
            });
        } else {
            let text = (0..rng.gen_range(1..4))
                .map(|_| format!("Revenue was {} this year.", pool.choose(rng).unwrap()))
                .collect::<Vec<_>>()
                .join(" ");
            bodies.push(ParagraphBody::Prose { text });
        }
    }
    common::segmented(Document::new("r", bodies))
}

#[test]
fn source_types_agree_with_brute_force() {
    let pool = ["12", "12.0", "7%", "1,000", "3.5 million", "3,500,000", "42", "0.5", "19"];
    let queries = ["12", "7%", "7", "1,000", "1k", "3.5 million", "3.5", "42", "99", "0.50", "19%"];
    for seed in 0..200 {
        let mut rng = common::rng(seed);
        let report = planted_report(&mut rng, &pool);
        let index = NumberIndex::build(&report);
        let mut all = Vec::new();
        for p in &report.paragraphs {
            match &p.body {
                ParagraphBody::Prose { text } => all.extend(extract_numbers(text).into_iter().map(|m| (false, m))),
                ParagraphBody::Table { table } => {
                    for c in &table.cells {
                        all.extend(extract_numbers(&c.raw_text).into_iter().map(|m| (true, m)));
                    }
                }
            }
        }
        let mut counts = TypeCounts::default();
        for q in queries {
            let m = extract_numbers(q).remove(0);
            let in_prose = all.iter().any(|(t, r)| !t && numbers_match(&m, r));
            let in_table = all.iter().any(|(t, r)| *t && numbers_match(&m, r));
            let want = match (in_prose, in_table) {
                (true, false) => SourceType::A,
                (false, true) => SourceType::B,
                (true, true) => SourceType::C,
                (false, false) => SourceType::D,
            };
            let got = classify_source_type(&m, &index);
            assert_eq!(got, want, "seed {seed} query {q}");
            counts.add(got);
        }
        assert_eq!(counts.total(), queries.len());
        assert_eq!(index.raw_count(), all.len());
    }
}

#[test]
fn explanations_are_sound() {
    let pool = [
        "120", "100", "144.7", "98.0", "72,616", "300,000", "250,000", "$2.5 million", "12.5%", "40", "17.25",
    ];
    let queries = [
        "20", "220", "145", "144", "98", "72.6", "72,616", "550,000", "50,000", "2,500", "20%", "13", "2.5",
        "17.3", "17.2", "60", "0.3",
    ];
    let mut explained = 0;
    for seed in 0..150 {
        let mut rng = common::rng(500 + seed);
        let report = planted_report(&mut rng, &pool);
        let index = NumberIndex::build(&report);
        for q in queries {
            let m = extract_numbers(q).remove(0);
            if let Some(e) = explain_type_d(&m, &index, &Locality::default()) {
                assert!(e.verify(&m), "seed {seed} query {q}: {e:?}");
                for pair in e.operands.windows(2) {
                    assert!(Locality::default().allows(&pair[0], &pair[1]));
                }
                explained += 1;
            }
        }
    }
    assert!(explained > 100);
}

#[test]
fn table_cells_carry_their_coordinates() {
    let doc = common::segmented(Document::new(
        "t",
        vec![ParagraphBody::Table {
            table: Table {
                cells: vec![
                    Cell { row: 0, col: 0, raw_text: "Net sales".into() },
                    Cell { row: 0, col: 1, raw_text: "72,616".into() },
                    Cell { row: 1, col: 1, raw_text: "12 and 13".into() },
                ],
                preamble: "(In thousands)".into(),
            },
        }],
    ));
    let index = NumberIndex::build(&doc);
    let coords: Vec<_> = index
        .mentions()
        .iter()
        .map(|m| match m.container {
            Container::TableCell { row, col, .. } => (row, col, m.raw_text.clone()),
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(
        coords,
        [(0, 1, "72,616".to_string()), (1, 1, "12".to_string()), (1, 1, "13".to_string())]
    );
}
