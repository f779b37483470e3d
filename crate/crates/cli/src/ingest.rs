use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sumtrace_core::corpus::{parse_filing, segment_and_tokenize, shuffle_document, Document, RawFiling, StopwordList};

use crate::manifest::{corpus_ref, RunManifest};
use crate::workdir::{to_jsonl, write_file, Workdir};
use crate::{CliError, Outcome};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestError {
    pub file: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub documents: Vec<String>,
    pub shuffled: usize,
    pub errors: Vec<IngestError>,
}

pub fn corpus_files(corpus: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus)
        .map_err(|e| CliError::fatal(corpus.display(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn load(path: &Path, stopwords: &StopwordList) -> Result<Document, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let raw: RawFiling = serde_json::from_str(&text).map_err(|e| format!("not a filing: {e}"))?;
    if raw.filing_id.trim().is_empty() {
        return Err("empty filing_id".into());
    }
    let doc = parse_filing(&raw).map_err(|e| e.to_string())?;
    Ok(segment_and_tokenize(doc, stopwords))
}

/// Parses every `*.json` filing in `corpus`, writes segmented documents and
/// one shuffled variant per seed. Unparseable files are logged and skipped.
pub fn ingest(corpus: &Path, work: &Workdir, seeds: &[u64]) -> Result<(IngestReport, Outcome), CliError> {
    let files = corpus_files(corpus)?;
    if files.is_empty() {
        return Err(CliError::NoInput(format!("no *.json filings in {}", corpus.display())));
    }
    let stopwords = StopwordList::english();
    let parsed: Vec<(String, Result<Document, String>)> = files
        .par_iter()
        .map(|f| {
            let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            (name, load(f, &stopwords))
        })
        .collect();

    let mut report = IngestReport::default();
    let mut seen = BTreeSet::new();
    let mut docs = Vec::new();
    for (file, result) in parsed {
        match result {
            Ok(doc) if !seen.insert(doc.filing_id.clone()) => report.errors.push(IngestError {
                file,
                error: format!("duplicate filing_id {}", doc.filing_id),
            }),
            Ok(doc) => docs.push(doc),
            Err(error) => {
                tracing::warn!(%file, %error, "skipping filing");
                report.errors.push(IngestError { file, error });
            }
        }
    }

    for dir in [work.documents(), work.shuffled()] {
        if dir.exists() {
            std::fs::remove_dir_all(&dir).map_err(|e| CliError::fatal(dir.display(), e))?;
        }
    }
    docs.par_iter()
        .map(|doc| {
            let json = doc.to_json().map_err(|e| CliError::fatal(&doc.filing_id, e))?;
            write_file(&work.document(&doc.filing_id, None), json)?;
            for &seed in seeds {
                let shuffled = shuffle_document(doc, seed);
                let json = shuffled.to_json().map_err(|e| CliError::fatal(&doc.filing_id, e))?;
                write_file(&work.document(&doc.filing_id, Some(seed)), json)?;
            }
            Ok(())
        })
        .collect::<Result<Vec<()>, CliError>>()?;
    report.documents = docs.iter().map(|d| d.filing_id.clone()).collect();
    report.shuffled = docs.len() * seeds.len();
    write_file(&work.ingest_errors(), to_jsonl(&report.errors)?)?;

    let mut manifest = RunManifest::load(work)?;
    manifest.corpus = Some(corpus_ref(corpus, &files)?);
    manifest.shuffle_seeds = seeds.to_vec();
    manifest.save(work)?;
    let outcome = Outcome {
        failures: report.errors.len(),
    };
    Ok((report, outcome))
}

pub fn load_document(work: &Workdir, filing_id: &str, seed: Option<u64>) -> Result<Document, CliError> {
    let path = work.document(filing_id, seed);
    let json = std::fs::read_to_string(&path).map_err(|e| CliError::fatal(path.display(), e))?;
    Document::from_json(&json).map_err(|e| CliError::fatal(path.display(), e))
}

/// Filing ids of the ingested documents, sorted.
pub fn ingested_ids(work: &Workdir) -> Result<Vec<String>, CliError> {
    Ok(crate::workdir::list_files(&work.documents())?
        .into_iter()
        .filter_map(|f| f.strip_suffix(".json").map(str::to_string))
        .collect())
}
