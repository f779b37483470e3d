use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use super::record::{AnnotationRecord, RecordKey};
use super::AuditError;

pub type Snapshot = Arc<BTreeMap<RecordKey, AnnotationRecord>>;

/// Append-only JSONL annotation log. The latest revision of each record wins
/// on replay. Writes are serialized; readers take cheap snapshots.
pub struct AnnotationStore {
    path: Option<PathBuf>,
    writer: Mutex<Option<File>>,
    state: RwLock<Snapshot>,
}

impl AnnotationStore {
    /// A store with no backing file.
    pub fn in_memory() -> Self {
        Self {
            path: None,
            writer: Mutex::new(None),
            state: RwLock::new(Arc::default()),
        }
    }

    /// Opens or creates the log at `path`, replaying existing lines.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, AuditError> {
        let path = path.as_ref().to_path_buf();
        let state = if path.exists() {
            replay(&path)?
        } else {
            BTreeMap::new()
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| AuditError::Io(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: Some(path),
            writer: Mutex::new(Some(file)),
            state: RwLock::new(Arc::new(state)),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn snapshot(&self) -> Snapshot {
        self.state.read().expect("store lock poisoned").clone()
    }

    pub fn get(&self, key: &RecordKey) -> Option<AnnotationRecord> {
        self.snapshot().get(key).cloned()
    }

    pub fn current_revision(&self, key: &RecordKey) -> u64 {
        self.get(key).map_or(0, |r| r.revision)
    }

    /// Appends `record` if it validates and its revision is exactly one past
    /// the stored one. Returns the stored revision.
    pub fn record(&self, record: AnnotationRecord) -> Result<u64, AuditError> {
        record.validate()?;
        let mut writer = self.writer.lock().expect("store lock poisoned");
        let key = record.key();
        let current = self.snapshot().get(&key).map_or(0, |r| r.revision);
        if record.revision != current + 1 {
            return Err(AuditError::StaleRevision {
                expected: current + 1,
                got: record.revision,
            });
        }
        if let Some(file) = writer.as_mut() {
            let line = serde_json::to_string(&record).map_err(|e| AuditError::Io(e.to_string()))?;
            writeln!(file, "{line}")
                .and_then(|_| file.flush())
                .map_err(|e| AuditError::Io(e.to_string()))?;
        }
        let revision = record.revision;
        let mut state = self.state.write().expect("store lock poisoned");
        Arc::make_mut(&mut state).insert(key, record);
        Ok(revision)
    }
}

fn replay(path: &Path) -> Result<BTreeMap<RecordKey, AnnotationRecord>, AuditError> {
    let file = File::open(path).map_err(|e| AuditError::Io(format!("{}: {e}", path.display())))?;
    let mut state: BTreeMap<RecordKey, AnnotationRecord> = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| AuditError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: AnnotationRecord = serde_json::from_str(&line).map_err(|e| AuditError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if record.schema_version != super::STORE_SCHEMA_VERSION {
            return Err(AuditError::UnsupportedSchema(record.schema_version));
        }
        let key = record.key();
        if state.get(&key).map_or(true, |r| r.revision < record.revision) {
            state.insert(key, record);
        }
    }
    Ok(state)
}
