use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::prompt::PromptKind;
use crate::GatewayError;

/// Deterministic key over the inputs that decide a summary.
pub fn cassette_key(filing_id: &str, provider: &str, model: &str, kind: PromptKind, shuffle_seed: Option<u64>) -> String {
    let seed = shuffle_seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    let material = format!("{filing_id}\n{provider}\n{model}\n{}\n{seed}", kind.name());
    hex::encode(Sha256::digest(material.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cassette {
    pub cassette_key: String,
    pub filing_id: String,
    pub provider_id: String,
    pub model_name: String,
    pub prompt_kind: PromptKind,
    pub shuffle_seed: Option<u64>,
    pub prompt: String,
    /// Request body as sent to the provider.
    pub request: serde_json::Value,
    /// Raw response body.
    pub response: serde_json::Value,
    pub summary_text: String,
}

/// One JSON file per key. Writes go through a temp file and a rename, so a
/// reader never sees a partial cassette and the last complete write wins.
#[derive(Debug, Clone)]
pub struct CassetteStore {
    dir: PathBuf,
}

impl CassetteStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Result<Cassette, GatewayError> {
        let path = self.path(key);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(GatewayError::CassetteMiss { key: key.to_string() })
            }
            Err(e) => return Err(GatewayError::io(path.display(), e)),
        };
        serde_json::from_str(&text).map_err(|e| GatewayError::io(path.display(), e))
    }

    pub fn save(&self, cassette: &Cassette) -> Result<(), GatewayError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| GatewayError::io(self.dir.display(), e))?;
        let path = self.path(&cassette.cassette_key);
        let tmp = tempfile_in(&self.dir, &cassette.cassette_key);
        let body = serde_json::to_string_pretty(cassette).map_err(|e| GatewayError::io("cassette", e))?;
        std::fs::write(&tmp, body + "\n").map_err(|e| GatewayError::io(tmp.display(), e))?;
        if path.exists() {
            tracing::info!(key = %cassette.cassette_key, "overwriting existing cassette");
        }
        std::fs::rename(&tmp, &path).map_err(|e| GatewayError::io(path.display(), e))
    }
}

fn tempfile_in(dir: &Path, key: &str) -> PathBuf {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    dir.join(format!(".{key}.{}.{n}.tmp", std::process::id()))
}
