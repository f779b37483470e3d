use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::CliError;

/// Stage artifacts under one run directory.
#[derive(Debug, Clone)]
pub struct Workdir {
    root: PathBuf,
}

impl Workdir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn documents(&self) -> PathBuf {
        self.root.join("documents")
    }

    pub fn shuffled(&self) -> PathBuf {
        self.root.join("shuffled")
    }

    pub fn document(&self, filing_id: &str, seed: Option<u64>) -> PathBuf {
        match seed {
            None => self.documents().join(format!("{filing_id}.json")),
            Some(s) => self.shuffled().join(format!("{filing_id}-s{s}.json")),
        }
    }

    pub fn ingest_errors(&self) -> PathBuf {
        self.root.join("ingest_errors.jsonl")
    }

    pub fn summaries(&self) -> PathBuf {
        self.root.join("summaries.jsonl")
    }

    pub fn summarize_errors(&self) -> PathBuf {
        self.root.join("summarize_errors.jsonl")
    }

    pub fn analysis(&self) -> PathBuf {
        self.root.join("analysis")
    }

    pub fn audit(&self) -> PathBuf {
        self.root.join("audit")
    }

    pub fn tasks(&self) -> PathBuf {
        self.audit().join("tasks.jsonl")
    }

    pub fn annotations(&self) -> PathBuf {
        self.audit().join("annotations.jsonl")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::fatal(parent.display(), e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::fatal(path.display(), e))
}

pub fn to_jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> Result<String, CliError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).map_err(|e| CliError::fatal("serialize", e))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::fatal(path.display(), e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| CliError::fatal(format!("{}:{}", path.display(), i + 1), e)))
        .collect()
}

/// Files below `dir`, sorted, as paths relative to it with `/` separators.
pub fn list_files(dir: &Path) -> Result<Vec<String>, CliError> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<String>) -> std::io::Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(base, &path, out)?;
            } else if let Ok(rel) = path.strip_prefix(base) {
                out.push(rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"));
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    if dir.exists() {
        walk(dir, dir, &mut out).map_err(|e| CliError::fatal(dir.display(), e))?;
    }
    out.sort();
    Ok(out)
}
