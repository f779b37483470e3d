use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use sumtrace_core::corpus::{segment_and_tokenize, word_count, Document, StopwordList};
use sumtrace_core::numerics::{
    classify_source_type, density_ratio, explain_type_d, extract_prose_numbers, DerivedOpKind, Locality,
    NumberIndex, SourceType, TypeCounts,
};
use sumtrace_core::trace::{
    position_histogram, AttributionClass, AttributionRecord, HistogramSource, SentenceAttribution, Tracer,
};
use sumtrace_gateway::SummaryRecord;

use crate::ingest::load_document;
use crate::manifest::RunManifest;
use crate::workdir::{read_jsonl, to_jsonl, write_file, Workdir};
use crate::{CliError, Outcome};

pub const DEFAULT_BINS: usize = 5;

/// Table grouping: model, prompt kind, and original vs shuffled input.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupKey {
    pub model: String,
    pub prompt: String,
    pub variant: &'static str,
}

impl GroupKey {
    fn of(s: &SummaryRecord) -> Self {
        Self {
            model: s.model.model_name.clone(),
            prompt: s.prompt_kind.name().to_string(),
            variant: if s.shuffled { "shuffled" } else { "original" },
        }
    }

    fn cells(&self) -> [String; 3] {
        [self.model.clone(), self.prompt.clone(), self.variant.to_string()]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DerivedCounts {
    pub rounding: usize,
    pub unit_rescale: usize,
    pub difference: usize,
    pub sum: usize,
    pub rate_of_change: usize,
    pub unexplained: usize,
    /// Roundings that half-up rounding does not reproduce.
    pub incorrect_rounding: usize,
}

/// Measurements of one summary against the report it was generated from.
#[derive(Debug, Clone)]
pub struct SummaryAnalysis {
    pub record: SummaryRecord,
    pub summary_words: usize,
    pub summary_numbers: usize,
    pub report_prose_words: usize,
    pub report_table_words: usize,
    pub report_numbers: usize,
    pub report_numbers_distinct: usize,
    pub types: TypeCounts,
    pub derived: DerivedCounts,
    pub attributions: Vec<SentenceAttribution>,
    pub mentions: Vec<MentionRow>,
}

impl SummaryAnalysis {
    pub fn class_count(&self, class: AttributionClass) -> usize {
        self.attributions.iter().filter(|a| a.class == class).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MentionRow {
    pub summary_id: String,
    pub paragraph_index: usize,
    pub sentence_index: usize,
    pub span_start: usize,
    pub span_end: usize,
    pub raw_text: String,
    pub value: String,
    pub source_type: SourceType,
    pub derived_op: Option<DerivedOpKind>,
    pub derived_correct: Option<bool>,
}

fn analyze_one(
    record: &SummaryRecord,
    report: &Document,
    index: &NumberIndex,
    tracer: &Tracer,
    view: &sumtrace_core::trace::ReportView,
    stopwords: &StopwordList,
) -> Result<SummaryAnalysis, String> {
    let summary = segment_and_tokenize(Document::from_plain_text(&record.summary_id, &record.summary_text), stopwords);
    let attributions = tracer
        .classify_summary(&summary, view)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let numbers = extract_prose_numbers(&summary);
    let mut types = TypeCounts::default();
    let mut derived = DerivedCounts::default();
    let mut mentions = Vec::new();
    for m in &numbers {
        let t = classify_source_type(m, index);
        types.add(t);
        let explanation = (t == SourceType::D)
            .then(|| explain_type_d(m, index, &Locality::default()))
            .flatten();
        if t == SourceType::D {
            match &explanation {
                None => derived.unexplained += 1,
                Some(e) => match e.kind {
                    DerivedOpKind::Rounding => {
                        derived.rounding += 1;
                        if e.correct == Some(false) {
                            derived.incorrect_rounding += 1;
                        }
                    }
                    DerivedOpKind::UnitRescale => derived.unit_rescale += 1,
                    DerivedOpKind::Difference => derived.difference += 1,
                    DerivedOpKind::Sum => derived.sum += 1,
                    DerivedOpKind::RateOfChange => derived.rate_of_change += 1,
                },
            }
        }
        let (paragraph_index, sentence_index) = match m.container {
            sumtrace_core::numerics::Container::Prose {
                paragraph_index,
                sentence_index,
            } => (paragraph_index, sentence_index),
            _ => continue,
        };
        mentions.push(MentionRow {
            summary_id: record.summary_id.clone(),
            paragraph_index,
            sentence_index,
            span_start: m.char_span.start,
            span_end: m.char_span.end,
            raw_text: m.raw_text.clone(),
            value: m.value.to_string(),
            source_type: t,
            derived_op: explanation.as_ref().map(|e| e.kind),
            derived_correct: explanation.and_then(|e| e.correct),
        });
    }
    let (report_prose_words, report_table_words) = report.word_counts();
    Ok(SummaryAnalysis {
        record: record.clone(),
        summary_words: word_count(&record.summary_text),
        summary_numbers: numbers.len(),
        report_prose_words,
        report_table_words,
        report_numbers: index.raw_count(),
        report_numbers_distinct: index.distinct_count(),
        types,
        derived,
        attributions,
        mentions,
    })
}

/// Analyzes every summary against its own input (the shuffled report for
/// shuffled summaries). Summaries whose report is missing are skipped.
pub fn analyze_records(work: &Workdir, records: &[SummaryRecord]) -> (Vec<SummaryAnalysis>, usize) {
    let stopwords = StopwordList::english();
    let tracer = Tracer::lexical(stopwords.clone());
    let mut by_report: BTreeMap<(String, Option<u64>), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_report.entry((r.filing_id.clone(), r.shuffle_seed)).or_default().push(i);
    }
    let results: Vec<(usize, Result<SummaryAnalysis, String>)> = by_report
        .par_iter()
        .flat_map_iter(|((filing, seed), idx)| {
            let loaded = load_document(work, filing, *seed).map(|report| {
                let index = NumberIndex::build(&report);
                let view = tracer.view(&report);
                (report, index, view)
            });
            idx.iter()
                .map(|&i| {
                    let out = match &loaded {
                        Ok((report, index, view)) => analyze_one(&records[i], report, index, &tracer, view, &stopwords),
                        Err(e) => Err(format!("missing report: {e}")),
                    };
                    (i, out)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut ordered: Vec<_> = results;
    ordered.sort_by_key(|(i, _)| *i);
    let mut out = Vec::new();
    let mut failures = 0;
    for (i, r) in ordered {
        match r {
            Ok(a) => out.push(a),
            Err(e) => {
                tracing::warn!(summary = %records[i].summary_id, "skipping summary: {e}");
                failures += 1;
            }
        }
    }
    (out, failures)
}

fn pct(n: usize, total: usize) -> String {
    if total == 0 {
        "0.00".into()
    } else {
        format!("{:.2}", n as f64 * 100.0 / total as f64)
    }
}

fn avg(sum: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

fn density_cell(numbers: f64, words: f64) -> String {
    density_ratio(numbers, words).map_or_else(|_| String::new(), |d| format!("{d:.2}"))
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::fatal("csv", e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::fatal("csv", e))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::fatal("csv", e))?;
    String::from_utf8(bytes).map_err(|e| CliError::fatal("csv", e))
}

pub const SUMMARY_NUMERICS_HEADER: &[&str] = &[
    "summary_id", "filing_id", "model", "prompt", "variant", "shuffle_seed", "refused", "summary_words",
    "summary_numbers", "summary_density_pct", "report_prose_words", "report_table_words", "report_numbers",
    "report_numbers_distinct", "sentences", "1-1", "2-1", "abstractive", "A", "B", "C", "D",
];

pub fn summary_numerics_csv(analyses: &[SummaryAnalysis]) -> Result<String, CliError> {
    let rows = analyses
        .iter()
        .map(|a| {
            let key = GroupKey::of(&a.record);
            let [model, prompt, variant] = key.cells();
            vec![
                a.record.summary_id.clone(),
                a.record.filing_id.clone(),
                model,
                prompt,
                variant,
                a.record.shuffle_seed.map(|s| s.to_string()).unwrap_or_default(),
                a.record.refused.to_string(),
                a.summary_words.to_string(),
                a.summary_numbers.to_string(),
                density_cell(a.summary_numbers as f64, a.summary_words as f64),
                a.report_prose_words.to_string(),
                a.report_table_words.to_string(),
                a.report_numbers.to_string(),
                a.report_numbers_distinct.to_string(),
                a.attributions.len().to_string(),
                a.class_count(AttributionClass::Extractive11).to_string(),
                a.class_count(AttributionClass::Synthesizing21).to_string(),
                a.class_count(AttributionClass::Abstractive).to_string(),
                a.types.a.to_string(),
                a.types.b.to_string(),
                a.types.c.to_string(),
                a.types.d.to_string(),
            ]
        })
        .collect();
    csv_string(SUMMARY_NUMERICS_HEADER, rows)
}

/// Refused summaries are listed per summary but left out of group tables.
fn groups(analyses: &[SummaryAnalysis]) -> BTreeMap<GroupKey, Vec<&SummaryAnalysis>> {
    let mut g: BTreeMap<GroupKey, Vec<&SummaryAnalysis>> = BTreeMap::new();
    for a in analyses.iter().filter(|a| !a.record.refused) {
        g.entry(GroupKey::of(&a.record)).or_default().push(a);
    }
    g
}

pub const SUMMARY_STATS_HEADER: &[&str] = &[
    "model", "prompt", "variant", "summaries", "avg_summary_words", "avg_summary_numbers", "summary_density_pct",
    "avg_report_words", "avg_report_numbers", "report_density_pct",
];

pub fn summary_stats_csv(analyses: &[SummaryAnalysis]) -> Result<String, CliError> {
    let rows = groups(analyses)
        .into_iter()
        .map(|(key, members)| {
            let n = members.len();
            let sw = avg(members.iter().map(|a| a.summary_words).sum(), n);
            let sn = avg(members.iter().map(|a| a.summary_numbers).sum(), n);
            let rw = avg(members.iter().map(|a| a.report_prose_words + a.report_table_words).sum(), n);
            let rn = avg(members.iter().map(|a| a.report_numbers).sum(), n);
            let mut row = key.cells().to_vec();
            row.extend([
                n.to_string(),
                format!("{sw:.2}"),
                format!("{sn:.2}"),
                density_cell(sn, sw),
                format!("{rw:.2}"),
                format!("{rn:.2}"),
                density_cell(rn, rw),
            ]);
            row
        })
        .collect();
    csv_string(SUMMARY_STATS_HEADER, rows)
}

pub const EXTRACTIVENESS_HEADER: &[&str] = &[
    "model", "prompt", "variant", "sentences", "1-1", "2-1", "abstractive", "1-1_pct", "2-1_pct", "abstractive_pct",
];

pub fn extractiveness_csv(analyses: &[SummaryAnalysis]) -> Result<String, CliError> {
    let rows = groups(analyses)
        .into_iter()
        .map(|(key, members)| {
            let count = |c| members.iter().map(|a| a.class_count(c)).sum::<usize>();
            let total: usize = members.iter().map(|a| a.attributions.len()).sum();
            let (e, s, ab) = (
                count(AttributionClass::Extractive11),
                count(AttributionClass::Synthesizing21),
                count(AttributionClass::Abstractive),
            );
            let mut row = key.cells().to_vec();
            row.extend([
                total.to_string(),
                e.to_string(),
                s.to_string(),
                ab.to_string(),
                pct(e, total),
                pct(s, total),
                pct(ab, total),
            ]);
            row
        })
        .collect();
    csv_string(EXTRACTIVENESS_HEADER, rows)
}

pub const NUMERIC_TYPES_HEADER: &[&str] = &[
    "model", "prompt", "variant", "numbers", "A", "B", "C", "D", "A_pct", "B_pct", "C_pct", "D_pct", "rounding",
    "incorrect_rounding", "unit_rescale", "difference", "sum", "rate_of_change", "unexplained",
];

pub fn numeric_types_csv(analyses: &[SummaryAnalysis]) -> Result<String, CliError> {
    let rows = groups(analyses)
        .into_iter()
        .map(|(key, members)| {
            let mut t = TypeCounts::default();
            let mut d = DerivedCounts::default();
            for a in &members {
                t.a += a.types.a;
                t.b += a.types.b;
                t.c += a.types.c;
                t.d += a.types.d;
                d.rounding += a.derived.rounding;
                d.incorrect_rounding += a.derived.incorrect_rounding;
                d.unit_rescale += a.derived.unit_rescale;
                d.difference += a.derived.difference;
                d.sum += a.derived.sum;
                d.rate_of_change += a.derived.rate_of_change;
                d.unexplained += a.derived.unexplained;
            }
            let total = t.total();
            let mut row = key.cells().to_vec();
            row.push(total.to_string());
            row.extend(SourceType::ALL.iter().map(|s| t.get(*s).to_string()));
            row.extend(SourceType::ALL.iter().map(|s| pct(t.get(*s), total)));
            row.extend(
                [d.rounding, d.incorrect_rounding, d.unit_rescale, d.difference, d.sum, d.rate_of_change, d.unexplained]
                    .map(|n| n.to_string()),
            );
            row
        })
        .collect();
    csv_string(NUMERIC_TYPES_HEADER, rows)
}

pub const POSITION_HISTOGRAM_HEADER: &[&str] =
    &["model", "prompt", "variant", "source", "bin_lo", "bin_hi", "count", "mass"];

pub fn position_histogram_csv(analyses: &[SummaryAnalysis], bins: usize) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for (key, members) in groups(analyses) {
        let attrs: Vec<SentenceAttribution> = members.iter().flat_map(|a| a.attributions.iter().cloned()).collect();
        for (name, source) in [
            ("1-1", HistogramSource::Extractive),
            ("1-1+2-1", HistogramSource::WithSynthesizing),
        ] {
            let h = position_histogram(&attrs, bins, source).map_err(|e| CliError::Fatal(e.to_string()))?;
            for b in h.bins {
                let mut row = key.cells().to_vec();
                row.extend([
                    name.to_string(),
                    format!("{:.4}", b.lo),
                    format!("{:.4}", b.hi),
                    b.count.to_string(),
                    format!("{:.4}", b.mass),
                ]);
                rows.push(row);
            }
        }
    }
    csv_string(POSITION_HISTOGRAM_HEADER, rows)
}

const DICTIONARY: &[(&str, &str, &str)] = &[
    ("summary_numerics.csv", "summary_id", "filing, optional shuffle seed, model and prompt joined by --"),
    ("summary_numerics.csv", "variant", "original or shuffled (paragraph order permuted before summarizing)"),
    ("summary_numerics.csv", "shuffle_seed", "seed of the shuffled input; empty for the original order"),
    ("summary_numerics.csv", "refused", "model declined or returned nothing; excluded from group tables"),
    ("summary_numerics.csv", "summary_words", "whitespace-delimited words in the summary"),
    ("summary_numerics.csv", "summary_numbers", "numbers extracted from the summary"),
    ("summary_numerics.csv", "summary_density_pct", "summary_numbers per 100 summary words"),
    ("summary_numerics.csv", "report_prose_words", "words in report prose paragraphs"),
    ("summary_numerics.csv", "report_table_words", "words in report table cells"),
    ("summary_numerics.csv", "report_numbers", "numbers in the report, repeats included"),
    ("summary_numerics.csv", "report_numbers_distinct", "distinct report numbers under value matching"),
    ("summary_numerics.csv", "sentences", "summary sentences"),
    ("summary_numerics.csv", "1-1", "sentences attributed to one report sentence or table"),
    ("summary_numerics.csv", "2-1", "sentences attributed only to a pair of report units"),
    ("summary_numerics.csv", "abstractive", "sentences with no attribution above the threshold"),
    ("summary_numerics.csv", "A", "summary numbers found only in report prose"),
    ("summary_numerics.csv", "B", "summary numbers found only in report tables"),
    ("summary_numerics.csv", "C", "summary numbers found in both prose and tables"),
    ("summary_numerics.csv", "D", "summary numbers found in neither"),
    ("summary_stats.csv", "summaries", "non-refused summaries in the group"),
    ("summary_stats.csv", "avg_summary_words", "mean summary words"),
    ("summary_stats.csv", "avg_summary_numbers", "mean numbers per summary"),
    ("summary_stats.csv", "summary_density_pct", "avg_summary_numbers per 100 avg_summary_words"),
    ("summary_stats.csv", "avg_report_words", "mean report words, prose plus tables"),
    ("summary_stats.csv", "avg_report_numbers", "mean report numbers, repeats included"),
    ("summary_stats.csv", "report_density_pct", "avg_report_numbers per 100 avg_report_words"),
    ("extractiveness.csv", "sentences", "summary sentences in the group"),
    ("extractiveness.csv", "1-1", "count of 1-1 sentences"),
    ("extractiveness.csv", "2-1", "count of 2-1 sentences"),
    ("extractiveness.csv", "abstractive", "count of abstractive sentences"),
    ("extractiveness.csv", "*_pct", "count as a percentage of sentences"),
    ("numeric_types.csv", "numbers", "summary numbers in the group"),
    ("numeric_types.csv", "A..D", "summary numbers by source type"),
    ("numeric_types.csv", "*_pct", "type count as a percentage of numbers"),
    ("numeric_types.csv", "rounding", "type D numbers explained as a rounded report value"),
    ("numeric_types.csv", "incorrect_rounding", "roundings that half-up rounding does not reproduce"),
    ("numeric_types.csv", "unit_rescale", "type D numbers explained as a report value in other units"),
    ("numeric_types.csv", "difference", "type D numbers equal to the difference of two nearby report values"),
    ("numeric_types.csv", "sum", "type D numbers equal to the sum of two nearby report values"),
    ("numeric_types.csv", "rate_of_change", "type D percentages equal to the change between two nearby report values"),
    ("numeric_types.csv", "unexplained", "type D numbers with no derivation found"),
    ("position_histogram.csv", "source", "1-1 sources only, or 1-1 plus the mean position of 2-1 pairs"),
    ("position_histogram.csv", "bin_lo", "lower edge of the relative position bin (inclusive)"),
    ("position_histogram.csv", "bin_hi", "upper edge (exclusive, except the last bin)"),
    ("position_histogram.csv", "count", "attributed sentences whose source falls in the bin"),
    ("position_histogram.csv", "mass", "count over all attributed sentences in the group"),
    ("*", "model", "model name from the run configuration"),
    ("*", "prompt", "prompt kind: simple, num, tab, numtab or cot"),
    ("*", "variant", "original or shuffled input"),
];

pub fn data_dictionary_csv() -> Result<String, CliError> {
    csv_string(
        &["file", "column", "description"],
        DICTIONARY.iter().map(|(f, c, d)| vec![f.to_string(), c.to_string(), d.to_string()]).collect(),
    )
}

/// Runs the analyses over `summaries.jsonl` and writes the CSV bundle into
/// `analysis/`.
pub fn analyze(work: &Workdir, bins: usize) -> Result<(Vec<SummaryAnalysis>, Outcome), CliError> {
    if bins < 2 {
        return Err(CliError::Fatal(format!("--bins must be at least 2, got {bins}")));
    }
    let records: Vec<SummaryRecord> = if work.summaries().exists() {
        read_jsonl(&work.summaries())?
    } else {
        Vec::new()
    };
    if records.is_empty() {
        return Err(CliError::NoInput("no summaries; run summarize first".into()));
    }
    let (analyses, failures) = analyze_records(work, &records);
    let dir = work.analysis();
    let attributions: Vec<AttributionRecord> = analyses
        .iter()
        .flat_map(|a| a.attributions.iter().map(|s| AttributionRecord::new(&a.record.summary_id, s)))
        .collect();
    let mentions: Vec<&MentionRow> = analyses.iter().flat_map(|a| &a.mentions).collect();
    write_file(&dir.join("summary_numerics.csv"), summary_numerics_csv(&analyses)?)?;
    write_file(&dir.join("summary_stats.csv"), summary_stats_csv(&analyses)?)?;
    write_file(&dir.join("extractiveness.csv"), extractiveness_csv(&analyses)?)?;
    write_file(&dir.join("numeric_types.csv"), numeric_types_csv(&analyses)?)?;
    write_file(&dir.join("position_histogram.csv"), position_histogram_csv(&analyses, bins)?)?;
    write_file(&dir.join("attributions.jsonl"), to_jsonl(&attributions)?)?;
    write_file(&dir.join("mentions.jsonl"), to_jsonl(&mentions)?)?;
    write_file(&dir.join("data_dictionary.csv"), data_dictionary_csv()?)?;
    let mut manifest = RunManifest::load(work)?;
    manifest.bins = Some(bins);
    manifest.save(work)?;
    Ok((analyses, Outcome { failures }))
}
