use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::Utc;
use serde::{Deserialize, Serialize};
use sumtrace_core::audit::{
    extract_candidates, AnnotationRecord, AnnotationStore, AnnotationTask, AuditError, HallucinationLabel, MatchKind,
    QuoteLocation, Submission,
};
use sumtrace_core::corpus::{segment_and_tokenize, Document, Span, StopwordList};
use sumtrace_core::numerics::{extract_numbers, NumberIndex, NumericMention};
use thiserror::Error;

use crate::clock::{Clock, SystemClock};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ServiceError {
    #[error("unknown task {0}")]
    UnknownTask(u64),
    #[error("unknown summary {0}")]
    UnknownSummary(String),
    #[error("task {0} is not leased to this session")]
    LeaseExpired(u64),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Open,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeasedTask {
    pub task: AnnotationTask,
    pub status: TaskStatus,
    pub lease_expires_in_ms: u64,
    /// Revision a submission for this task must carry.
    pub next_revision: u64,
    /// Latest stored record, e.g. a saved Pending draft.
    pub current: Option<AnnotationRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub task_id: u64,
    pub revision: u64,
    pub status: TaskStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub total: usize,
    pub open: usize,
    pub done: usize,
    /// Open tasks currently held by a session.
    pub leased: usize,
    pub by_label: BTreeMap<HallucinationLabel, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMatch {
    Substring,
    Exact,
    FormatVariant,
}

impl From<MatchKind> for SearchMatch {
    fn from(k: MatchKind) -> Self {
        match k {
            MatchKind::Exact => SearchMatch::Exact,
            MatchKind::FormatVariant => SearchMatch::FormatVariant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub location: QuoteLocation,
    pub quote_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub match_kind: SearchMatch,
    /// Where the hit sits in `quote_text`.
    pub span: Span,
}

pub struct ReportEntry {
    pub report: Document,
    pub index: NumberIndex,
}

struct Lease {
    session: String,
    expires: Duration,
}

pub struct AnnotationService {
    tasks: Vec<AnnotationTask>,
    by_id: HashMap<u64, usize>,
    summaries: HashMap<String, String>,
    reports: HashMap<String, Arc<ReportEntry>>,
    store: AnnotationStore,
    leases: Mutex<HashMap<u64, Lease>>,
    ttl: Duration,
    clock: Arc<dyn Clock>,
}

impl AnnotationService {
    /// Reports are keyed by filing id; tasks name their filing in their metadata.
    pub fn new(
        mut tasks: Vec<AnnotationTask>,
        reports: impl IntoIterator<Item = Document>,
        store: AnnotationStore,
        ttl: Duration,
    ) -> Result<Self, ServiceError> {
        tasks.sort_by_key(|t| t.task_id);
        let mut by_id = HashMap::new();
        let mut summaries = HashMap::new();
        for (i, t) in tasks.iter().enumerate() {
            if by_id.insert(t.task_id, i).is_some() {
                return Err(ServiceError::InvalidInput(format!("duplicate task id {}", t.task_id)));
            }
            summaries.insert(t.meta.summary_id.clone(), t.meta.filing_id.clone());
        }
        let stopwords = StopwordList::english();
        let reports = reports
            .into_iter()
            .map(|doc| {
                let report = if doc.sentences.is_empty() {
                    segment_and_tokenize(doc, &stopwords)
                } else {
                    doc
                };
                let index = NumberIndex::build(&report);
                (report.filing_id.clone(), Arc::new(ReportEntry { report, index }))
            })
            .collect();
        Ok(Self {
            tasks,
            by_id,
            summaries,
            reports,
            store,
            leases: Mutex::new(HashMap::new()),
            ttl,
            clock: Arc::new(SystemClock::default()),
        })
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    /// Loads a task queue (JSONL), every `*.json` document in `reports_dir`
    /// and the annotation log.
    pub fn load(tasks: &Path, reports_dir: &Path, store: &Path, ttl: Duration) -> Result<Self, ServiceError> {
        let io = |p: &Path, e: &dyn std::fmt::Display| ServiceError::InvalidInput(format!("{}: {e}", p.display()));
        let text = std::fs::read_to_string(tasks).map_err(|e| io(tasks, &e))?;
        let queue = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str::<AnnotationTask>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| io(tasks, &e))?;
        let mut paths: Vec<_> = std::fs::read_dir(reports_dir)
            .map_err(|e| io(reports_dir, &e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut docs = Vec::new();
        for p in paths {
            let json = std::fs::read_to_string(&p).map_err(|e| io(&p, &e))?;
            docs.push(Document::from_json(&json).map_err(|e| io(&p, &e))?);
        }
        Self::new(queue, docs, AnnotationStore::open(store)?, ttl)
    }

    pub fn tasks(&self) -> &[AnnotationTask] {
        &self.tasks
    }

    pub fn store(&self) -> &AnnotationStore {
        &self.store
    }

    fn is_done(record: Option<&AnnotationRecord>) -> bool {
        record.is_some_and(|r| r.label != HallucinationLabel::Pending)
    }

    fn lease_view(&self, task: &AnnotationTask, expires: Duration) -> LeasedTask {
        let current = self.store.get(&task.key());
        LeasedTask {
            task: task.clone(),
            status: if Self::is_done(current.as_ref()) { TaskStatus::Done } else { TaskStatus::Open },
            lease_expires_in_ms: expires.saturating_sub(self.clock.now()).as_millis() as u64,
            next_revision: current.as_ref().map_or(0, |r| r.revision) + 1,
            current,
        }
    }

    /// The session's live lease if it holds one, else the lowest-id Open task
    /// nobody else holds. `None` once every task is Done or held elsewhere.
    pub fn next_task(&self, session: &str) -> Result<Option<LeasedTask>, ServiceError> {
        if session.trim().is_empty() {
            return Err(ServiceError::InvalidInput("empty session id".into()));
        }
        let now = self.clock.now();
        let mut leases = self.leases.lock().expect("lease lock poisoned");
        leases.retain(|_, l| l.expires > now);
        let snapshot = self.store.snapshot();
        let held = leases
            .iter()
            .filter(|(_, l)| l.session == session)
            .map(|(id, _)| *id)
            .min();
        let pick = held.or_else(|| {
            self.tasks
                .iter()
                .find(|t| !leases.contains_key(&t.task_id) && !Self::is_done(snapshot.get(&t.key())))
                .map(|t| t.task_id)
        });
        let Some(task_id) = pick else {
            return Ok(None);
        };
        let expires = now + self.ttl;
        leases.insert(
            task_id,
            Lease {
                session: session.to_string(),
                expires,
            },
        );
        Ok(Some(self.lease_view(&self.tasks[self.by_id[&task_id]], expires)))
    }

    /// Stores the submission for a task leased to `session`. A non-Pending
    /// label completes the task and releases the lease; Pending keeps it.
    pub fn submit(&self, task_id: u64, session: &str, submission: Submission) -> Result<Ack, ServiceError> {
        let task = self
            .by_id
            .get(&task_id)
            .map(|i| &self.tasks[*i])
            .ok_or(ServiceError::UnknownTask(task_id))?;
        let now = self.clock.now();
        let mut leases = self.leases.lock().expect("lease lock poisoned");
        match leases.get(&task_id) {
            Some(l) if l.session == session && l.expires > now => {}
            _ => return Err(ServiceError::LeaseExpired(task_id)),
        }
        let pending = submission.label == HallucinationLabel::Pending;
        let revision = self.store.record(task.to_record(submission, Utc::now()))?;
        if pending {
            leases.get_mut(&task_id).expect("checked above").expires = now + self.ttl;
        } else {
            leases.remove(&task_id);
        }
        Ok(Ack {
            task_id,
            revision,
            status: if pending { TaskStatus::Open } else { TaskStatus::Done },
        })
    }

    pub fn progress(&self) -> Progress {
        let now = self.clock.now();
        let leases = self.leases.lock().expect("lease lock poisoned");
        let snapshot = self.store.snapshot();
        let mut p = Progress {
            total: self.tasks.len(),
            open: 0,
            done: 0,
            leased: 0,
            by_label: BTreeMap::new(),
        };
        for t in &self.tasks {
            match snapshot.get(&t.key()) {
                Some(r) if r.label != HallucinationLabel::Pending => {
                    p.done += 1;
                    *p.by_label.entry(r.label).or_default() += 1;
                }
                _ => {
                    p.open += 1;
                    if leases.get(&t.task_id).is_some_and(|l| l.expires > now) {
                        p.leased += 1;
                    }
                }
            }
        }
        p
    }

    pub fn report(&self, id: &str) -> Result<Arc<ReportEntry>, ServiceError> {
        let filing = self.summaries.get(id).map_or(id, String::as_str);
        self.reports
            .get(filing)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSummary(id.to_string()))
    }

    /// Case-insensitive substring hits over sentences and cells, plus
    /// numeric-equivalence hits when the query is a single number.
    pub fn search(&self, id: &str, query: &str) -> Result<Vec<SearchHit>, ServiceError> {
        let entry = self.report(id)?;
        let q = query.trim();
        if q.is_empty() {
            return Ok(Vec::new());
        }
        let report = &entry.report;
        let mut hits: Vec<SearchHit> = Vec::new();
        if let Some(m) = numeric_query(q) {
            hits.extend(extract_candidates(&m, report, &entry.index).into_iter().map(|c| SearchHit {
                location: c.location,
                quote_text: c.quote_text,
                context: c.context,
                match_kind: c.match_kind.into(),
                span: c.span,
            }));
        }
        let needle = q.to_ascii_lowercase();
        let mut lexical = Vec::new();
        for s in &report.sentences {
            let text = report.sentence_text(s);
            if let Some(at) = text.to_ascii_lowercase().find(&needle) {
                lexical.push(SearchHit {
                    location: QuoteLocation::Sentence {
                        paragraph_index: s.paragraph_index,
                        sentence_index: s.index,
                    },
                    quote_text: text.to_string(),
                    context: None,
                    match_kind: SearchMatch::Substring,
                    span: Span::new(at, at + needle.len()),
                });
            }
        }
        for (paragraph_index, table) in report.tables() {
            let rows = table.rows();
            for c in &table.cells {
                if let Some(at) = c.raw_text.to_ascii_lowercase().find(&needle) {
                    lexical.push(SearchHit {
                        location: QuoteLocation::Cell {
                            paragraph_index,
                            row: c.row,
                            col: c.col,
                        },
                        quote_text: c.raw_text.clone(),
                        context: rows
                            .get(c.row)
                            .map(|r| r.iter().map(|c| c.raw_text.trim()).collect::<Vec<_>>().join(" | ")),
                        match_kind: SearchMatch::Substring,
                        span: Span::new(at, at + needle.len()),
                    });
                }
            }
        }
        for h in lexical {
            if !hits.iter().any(|n| n.location == h.location) {
                hits.push(h);
            }
        }
        hits.sort_by_key(|h| document_order(&h.location));
        Ok(hits)
    }

    /// Latest revision of every stored record, one CSV row each.
    pub fn export_csv(&self) -> Result<String, ServiceError> {
        let task_ids: HashMap<_, _> = self.tasks.iter().map(|t| (t.key(), t.task_id)).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| ServiceError::InvalidInput(e.to_string());
        w.write_record([
            "task_id",
            "summary_id",
            "model",
            "prompt",
            "paragraph_index",
            "sentence_index",
            "span_start",
            "span_end",
            "value",
            "raw_value",
            "label",
            "evidence_quote",
            "comment",
            "annotator",
            "revision",
            "timestamp",
        ])
        .map_err(csv_err)?;
        for (key, r) in self.store.snapshot().iter() {
            w.write_record([
                task_ids.get(key).map(u64::to_string).unwrap_or_default(),
                r.summary_id.clone(),
                r.model.clone(),
                r.prompt.clone(),
                r.mention.paragraph_index.to_string(),
                r.mention.sentence_index.to_string(),
                r.mention.span.start.to_string(),
                r.mention.span.end.to_string(),
                r.value.to_string(),
                r.raw_value.clone(),
                label_name(r.label),
                r.evidence_quote.clone().unwrap_or_default(),
                r.comment.clone(),
                r.annotator.clone(),
                r.revision.to_string(),
                r.timestamp.to_rfc3339(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| ServiceError::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn label_name(label: HallucinationLabel) -> String {
    serde_json::to_value(label)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn document_order(l: &QuoteLocation) -> (usize, usize, usize) {
    match *l {
        QuoteLocation::Sentence {
            paragraph_index,
            sentence_index,
        } => (paragraph_index, sentence_index, 0),
        QuoteLocation::Cell {
            paragraph_index,
            row,
            col,
        } => (paragraph_index, row, col),
    }
}

/// The query's number when the query is one number with at most a currency
/// sign, percent sign or unit word around it.
pub fn numeric_query(q: &str) -> Option<NumericMention> {
    let mut found = extract_numbers(q);
    if found.len() != 1 {
        return None;
    }
    let m = found.remove(0);
    let rest = format!("{} {}", &q[..m.char_span.start], &q[m.char_span.end..]);
    let units = ["k", "m", "b", "bn", "thousand", "thousands", "million", "millions", "billion", "billions", "percent"];
    rest.split_whitespace()
        .map(|w| w.trim_matches(|c: char| matches!(c, '$' | '%' | '(' | ')' | ',' | '.')).to_ascii_lowercase())
        .all(|w| w.is_empty() || units.contains(&w.as_str()))
        .then_some(m)
}
