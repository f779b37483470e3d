use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sumtrace_gateway::{Gateway, Mode, PromptKind, SummaryRecord};

use crate::ingest::{ingested_ids, load_document};
use crate::manifest::RunManifest;
use crate::workdir::{to_jsonl, write_file, Workdir};
use crate::{CliError, Outcome};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummarizeError {
    pub filing_id: String,
    pub shuffle_seed: Option<u64>,
    pub model: String,
    pub prompt: PromptKind,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    pub models: Vec<String>,
    pub prompts: Vec<PromptKind>,
    /// Shuffled variants to summarize besides the original order.
    pub seeds: Vec<u64>,
}

/// Summarizes every ingested document (original plus each shuffled seed)
/// under every model and prompt. Output order is fixed by the matrix.
pub fn summarize(work: &Workdir, gateway: &Gateway, matrix: &Matrix, mode: Mode) -> Result<(Vec<SummaryRecord>, Outcome), CliError> {
    let ids = ingested_ids(work)?;
    if ids.is_empty() {
        return Err(CliError::NoInput("no ingested documents; run ingest first".into()));
    }
    for m in &matrix.models {
        gateway.config().model(m).map_err(|e| CliError::Fatal(e.to_string()))?;
    }
    let mut jobs = Vec::new();
    for id in &ids {
        for seed in std::iter::once(None).chain(matrix.seeds.iter().copied().map(Some)) {
            for model in &matrix.models {
                for &prompt in &matrix.prompts {
                    jobs.push((id.clone(), seed, model.clone(), prompt));
                }
            }
        }
    }
    let results: Vec<Result<SummaryRecord, SummarizeError>> = jobs
        .par_iter()
        .map(|(id, seed, model, prompt)| {
            let fail = |error: String| SummarizeError {
                filing_id: id.clone(),
                shuffle_seed: *seed,
                model: model.clone(),
                prompt: *prompt,
                error,
            };
            let doc = load_document(work, id, *seed).map_err(|e| fail(e.to_string()))?;
            gateway.summarize(&doc, *seed, model, *prompt, mode).map_err(|e| fail(e.to_string()))
        })
        .collect();
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                tracing::warn!(filing = %e.filing_id, model = %e.model, "summary failed: {}", e.error);
                errors.push(e);
            }
        }
    }
    write_file(&work.summaries(), to_jsonl(&records)?)?;
    write_file(&work.summarize_errors(), to_jsonl(&errors)?)?;
    let mut manifest = RunManifest::load(work)?;
    manifest.models = matrix.models.clone();
    manifest.prompts = matrix.prompts.iter().map(|p| p.name().to_string()).collect();
    manifest.shuffle_seeds = matrix.seeds.clone();
    manifest.mode = Some(format!("{mode:?}").to_lowercase());
    manifest.save(work)?;
    Ok((records, Outcome { failures: errors.len() }))
}
