use std::collections::BTreeSet;

use rayon::prelude::*;
use sumtrace_core::audit::{
    grouped_stats, stats_table_csv, tasks_for_summary, AnnotationStore, AnnotationTask, StatsFilter, SummaryMeta,
};
use sumtrace_core::corpus::{segment_and_tokenize, Document, StopwordList};
use sumtrace_core::numerics::NumberIndex;
use sumtrace_gateway::SummaryRecord;

use crate::ingest::load_document;
use crate::manifest::{sha256_hex, RunManifest};
use crate::workdir::{read_jsonl, to_jsonl, write_file, Workdir};
use crate::{CliError, Outcome};

/// Picks `n` filings in an order fixed by `seed`.
pub fn sample_filings<'a>(ids: impl IntoIterator<Item = &'a str>, n: usize, seed: u64) -> BTreeSet<String> {
    let mut keyed: Vec<(String, &str)> = ids
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|id| (sha256_hex(format!("{seed}:{id}").as_bytes()), id))
        .collect();
    keyed.sort();
    keyed.into_iter().take(n).map(|(_, id)| id.to_string()).collect()
}

/// Builds the annotation queue from original-order, non-refused summaries,
/// optionally restricted to a sample of `sample` filings.
pub fn init(work: &Workdir, sample: Option<usize>, seed: u64) -> Result<(Vec<AnnotationTask>, Outcome), CliError> {
    let records: Vec<SummaryRecord> = if work.summaries().exists() {
        read_jsonl(&work.summaries())?
    } else {
        Vec::new()
    };
    let mut eligible: Vec<&SummaryRecord> = records.iter().filter(|r| !r.shuffled && !r.refused).collect();
    if let Some(n) = sample {
        let keep = sample_filings(eligible.iter().map(|r| r.filing_id.as_str()), n, seed);
        eligible.retain(|r| keep.contains(&r.filing_id));
    }
    if eligible.is_empty() {
        return Err(CliError::NoInput("no eligible summaries for the audit queue".into()));
    }
    let stopwords = StopwordList::english();
    let built: Vec<Result<Vec<AnnotationTask>, String>> = eligible
        .par_iter()
        .map(|r| {
            let report = load_document(work, &r.filing_id, None).map_err(|e| format!("{}: {e}", r.summary_id))?;
            let index = NumberIndex::build(&report);
            let summary = segment_and_tokenize(Document::from_plain_text(&r.summary_id, &r.summary_text), &stopwords);
            let meta = SummaryMeta {
                summary_id: r.summary_id.clone(),
                filing_id: r.filing_id.clone(),
                model: r.model.model_name.clone(),
                prompt: r.prompt_kind.name().to_string(),
            };
            Ok(tasks_for_summary(0, &meta, &summary, &report, &index))
        })
        .collect();
    let mut tasks = Vec::new();
    let mut failures = 0;
    for b in built {
        match b {
            Ok(ts) => tasks.extend(ts),
            Err(e) => {
                tracing::warn!("skipping summary: {e}");
                failures += 1;
            }
        }
    }
    for (t, id) in tasks.iter_mut().zip(1..) {
        t.task_id = id;
    }
    write_file(&work.tasks(), to_jsonl(&tasks)?)?;
    RunManifest::load(work)?.save(work)?;
    Ok((tasks, Outcome { failures }))
}

/// Hallucination table per (model, prompt) over the annotation store.
pub fn stats(work: &Workdir, filter: &StatsFilter) -> Result<String, CliError> {
    let path = work.annotations();
    if !path.exists() {
        return Err(CliError::NoAnnotations);
    }
    let store = AnnotationStore::open(&path).map_err(|e| CliError::fatal(path.display(), e))?;
    let snapshot = store.snapshot();
    let groups = grouped_stats(snapshot.values().filter(|r| filter.accepts(r)));
    if groups.is_empty() {
        return Err(CliError::NoAnnotations);
    }
    let csv = stats_table_csv(&groups);
    write_file(&work.audit().join("hallucination_stats.csv"), &csv)?;
    Ok(csv)
}
