use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::embed::{cosine, EmbeddingError, EmbeddingProvider, LexicalEmbedder};
use super::greedy::{score_tokens, Score};
use super::view::ReportView;
use super::TraceError;
use crate::corpus::{Document, StopwordList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttributionClass {
    #[serde(rename = "1-1")]
    Extractive11,
    #[serde(rename = "2-1")]
    Synthesizing21,
    #[serde(rename = "abstractive")]
    Abstractive,
}

impl AttributionClass {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Extractive11 => "1-1",
            Self::Synthesizing21 => "2-1",
            Self::Abstractive => "abstractive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceAttribution {
    pub summary_sentence_index: usize,
    pub class: AttributionClass,
    /// Report unit indices: one for 1-1, two (ascending) for 2-1, none otherwise.
    pub sources: Vec<usize>,
    /// Best score reached: the chosen source or pair, or the best single
    /// for abstractive sentences.
    pub score: f64,
    /// Source index over report length; the mean of both for 2-1.
    pub position_fraction: Option<f64>,
    /// Number of units in the report the sources index into.
    pub report_units: usize,
}

/// One line of the attribution JSONL export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRecord {
    pub summary_id: String,
    pub sentence_index: usize,
    pub class: AttributionClass,
    pub sources: Vec<usize>,
    pub score: f64,
    pub position_fraction: Option<f64>,
}

impl AttributionRecord {
    pub fn new(summary_id: &str, a: &SentenceAttribution) -> Self {
        Self {
            summary_id: summary_id.to_string(),
            sentence_index: a.summary_sentence_index,
            class: a.class,
            sources: a.sources.clone(),
            score: a.score,
            position_fraction: a.position_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    /// Extractive threshold in hundredths; a score must be strictly above it.
    pub threshold_hundredths: u64,
    /// Singles kept as 2-1 pair candidates.
    pub top_k: usize,
    pub include_tables: bool,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            threshold_hundredths: 80,
            top_k: 50,
            include_tables: true,
        }
    }
}

/// Classifies summary sentences against a report.
pub struct Tracer {
    config: TraceConfig,
    stopwords: StopwordList,
    embedder: Arc<dyn EmbeddingProvider>,
    fallback: LexicalEmbedder,
}

impl Tracer {
    pub fn new(config: TraceConfig, stopwords: StopwordList, embedder: Arc<dyn EmbeddingProvider>) -> Self {
        let fallback = LexicalEmbedder::new(4096, stopwords.clone());
        Self {
            config,
            stopwords,
            embedder,
            fallback,
        }
    }

    /// Lexical-cosine tie-breaks and default thresholds.
    pub fn lexical(stopwords: StopwordList) -> Self {
        let embedder = Arc::new(LexicalEmbedder::new(4096, stopwords.clone()));
        Self::new(TraceConfig::default(), stopwords, embedder)
    }

    pub fn config(&self) -> &TraceConfig {
        &self.config
    }

    pub fn view(&self, report: &Document) -> ReportView {
        ReportView::new(report, &self.stopwords, self.config.include_tables)
    }

    pub fn classify_summary(
        &self,
        summary: &Document,
        report: &ReportView,
    ) -> Vec<Result<SentenceAttribution, TraceError>> {
        (0..summary.sentences.len())
            .map(|i| self.classify_sentence(i, summary, report))
            .collect()
    }

    /// 1-1 if the best single report unit scores above the threshold, else
    /// 2-1 if the best pair among the top-K singles (content tokens
    /// concatenated in document order) does, else abstractive.
    pub fn classify_sentence(
        &self,
        s_idx: usize,
        summary: &Document,
        report: &ReportView,
    ) -> Result<SentenceAttribution, TraceError> {
        let sentence = summary
            .sentences
            .get(s_idx)
            .ok_or(TraceError::SentenceOutOfRange {
                index: s_idx,
                len: summary.sentences.len(),
            })?;
        let s: Vec<String> = sentence.content_tokens.iter().map(|t| t.text.clone()).collect();
        if s.is_empty() {
            return Err(TraceError::EmptySummarySentence(s_idx));
        }
        let n_units = report.len();
        let threshold = self.config.threshold_hundredths;

        let singles: Vec<Score> = report
            .units
            .iter()
            .map(|u| score_tokens(&s, &u.content))
            .collect();
        let best = singles.iter().copied().max().unwrap_or(Score::zero(s.len()));

        if best.exceeds_hundredths(threshold) {
            let tied: Vec<usize> = (0..n_units).filter(|&i| singles[i] == best).collect();
            let source = if tied.len() == 1 {
                tied[0]
            } else {
                self.break_tie(summary.sentence_text(sentence), &tied, report)
            };
            return Ok(SentenceAttribution {
                summary_sentence_index: s_idx,
                class: AttributionClass::Extractive11,
                sources: vec![source],
                score: best.value(),
                position_fraction: Some(source as f64 / n_units as f64),
                report_units: n_units,
            });
        }

        // A unit sharing no token with the sentence cannot lift a pair above
        // its partner's single score, so only positive singles are paired.
        let mut candidates: Vec<usize> = (0..n_units).filter(|&i| singles[i].tenths > 0).collect();
        candidates.sort_by(|&a, &b| singles[b].cmp(&singles[a]).then(a.cmp(&b)));
        candidates.truncate(self.config.top_k);
        candidates.sort_unstable();

        let mut best_pair: Option<(usize, usize, Score)> = None;
        let mut joined: Vec<String> = Vec::new();
        for (x, &a) in candidates.iter().enumerate() {
            for &b in &candidates[x + 1..] {
                joined.clear();
                joined.extend_from_slice(&report.units[a].content);
                joined.extend_from_slice(&report.units[b].content);
                let score = score_tokens(&s, &joined);
                if best_pair.map_or(true, |(_, _, top)| score > top) {
                    best_pair = Some((a, b, score));
                }
            }
        }
        if let Some((a, b, score)) = best_pair {
            if score.exceeds_hundredths(threshold) {
                return Ok(SentenceAttribution {
                    summary_sentence_index: s_idx,
                    class: AttributionClass::Synthesizing21,
                    sources: vec![a, b],
                    score: score.value(),
                    position_fraction: Some((a + b) as f64 / (2 * n_units) as f64),
                    report_units: n_units,
                });
            }
        }

        Ok(SentenceAttribution {
            summary_sentence_index: s_idx,
            class: AttributionClass::Abstractive,
            sources: Vec::new(),
            score: best.value(),
            position_fraction: None,
            report_units: n_units,
        })
    }

    fn break_tie(&self, summary_text: &str, tied: &[usize], report: &ReportView) -> usize {
        let mut texts = Vec::with_capacity(tied.len() + 1);
        texts.push(summary_text);
        texts.extend(tied.iter().map(|&i| report.units[i].text.as_str()));

        let vectors = match self.embedder.embed(&texts) {
            Ok(v) if v.len() == texts.len() => v,
            Ok(v) => {
                let err = EmbeddingError::Shape {
                    expected: texts.len(),
                    got: v.len(),
                };
                warn!(provider = self.embedder.name(), %err, "falling back to lexical cosine");
                self.fallback.embed(&texts).expect("lexical embedding is infallible")
            }
            Err(err) => {
                warn!(provider = self.embedder.name(), %err, "falling back to lexical cosine");
                self.fallback.embed(&texts).expect("lexical embedding is infallible")
            }
        };

        let mut chosen = tied[0];
        let mut best = f64::NEG_INFINITY;
        for (k, &unit) in tied.iter().enumerate() {
            let c = cosine(&vectors[0], &vectors[k + 1]);
            if c > best {
                best = c;
                chosen = unit;
            }
        }
        chosen
    }
}
