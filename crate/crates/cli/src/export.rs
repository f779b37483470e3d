use std::path::Path;

use crate::workdir::{list_files, write_file, Workdir};
use crate::CliError;

/// Copies the analysis bundle, audit outputs and manifest to `out`.
pub fn export(work: &Workdir, out: &Path) -> Result<Vec<String>, CliError> {
    let mut files: Vec<String> = list_files(&work.analysis())?
        .into_iter()
        .map(|f| format!("analysis/{f}"))
        .collect();
    for f in ["audit/tasks.jsonl", "audit/hallucination_stats.csv", "manifest.json"] {
        if work.root().join(f).exists() {
            files.push(f.to_string());
        }
    }
    if files.is_empty() {
        return Err(CliError::NoInput("nothing to export; run analyze first".into()));
    }
    for f in &files {
        let src = work.root().join(f);
        let bytes = std::fs::read(&src).map_err(|e| CliError::fatal(src.display(), e))?;
        write_file(&out.join(f), bytes)?;
    }
    Ok(files)
}
