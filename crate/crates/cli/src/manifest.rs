use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::workdir::{list_files, write_file, Workdir};
use crate::CliError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRef {
    /// Directory name only, so manifests do not depend on where a run lives.
    pub name: String,
    /// Hash over the sorted (file name, content hash) list.
    pub sha256: String,
    pub files: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub corpus: Option<CorpusRef>,
    pub models: Vec<String>,
    pub prompts: Vec<String>,
    pub shuffle_seeds: Vec<u64>,
    pub mode: Option<String>,
    pub bins: Option<usize>,
    pub artifacts: Vec<Artifact>,
}

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            corpus: None,
            models: Vec::new(),
            prompts: Vec::new(),
            shuffle_seeds: Vec::new(),
            mode: None,
            bins: None,
            artifacts: Vec::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::fatal(path.display(), e))?;
    Ok(sha256_hex(&bytes))
}

pub fn corpus_ref(dir: &Path, files: &[std::path::PathBuf]) -> Result<CorpusRef, CliError> {
    let mut listing = String::new();
    for f in files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        listing.push_str(&format!("{name}\t{}\n", sha256_file(f)?));
    }
    Ok(CorpusRef {
        name: dir
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_default(),
        sha256: sha256_hex(listing.as_bytes()),
        files: files.len(),
    })
}

impl RunManifest {
    pub fn load(work: &Workdir) -> Result<Self, CliError> {
        let path = work.manifest();
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::fatal(path.display(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::fatal(path.display(), e))
    }

    /// Rehashes every file in the run directory and writes the manifest.
    pub fn save(mut self, work: &Workdir) -> Result<Self, CliError> {
        self.artifacts = list_files(work.root())?
            .into_iter()
            .filter(|p| p != "manifest.json")
            .map(|p| {
                let full = work.root().join(&p);
                let bytes = std::fs::metadata(&full).map_err(|e| CliError::fatal(full.display(), e))?.len();
                Ok(Artifact {
                    sha256: sha256_file(&full)?,
                    path: p,
                    bytes,
                })
            })
            .collect::<Result<_, CliError>>()?;
        let json = serde_json::to_string_pretty(&self).map_err(|e| CliError::fatal("manifest", e))?;
        write_file(&work.manifest(), json + "\n")?;
        Ok(self)
    }
}
