use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::Span;

/// A maximal run of summary tokens found contiguously in the report side.
/// Spans are token-index ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub summary_span: Span,
    pub report_span: Span,
    pub length: usize,
}

impl Fragment {
    fn new(summary_start: usize, report_start: usize, length: usize) -> Self {
        Self {
            summary_span: Span::new(summary_start, summary_start + length),
            report_span: Span::new(report_start, report_start + length),
            length,
        }
    }
}

/// Greedy left-to-right alignment of `summary` against `report`.
///
/// At each unmatched summary position the longest run starting there that
/// occurs contiguously in `report` becomes a fragment; equally long report
/// occurrences resolve to the earliest report start. Positions with no match
/// are skipped one token at a time.
pub fn greedy_fragments<T: PartialEq>(summary: &[T], report: &[T]) -> Vec<Fragment> {
    let mut fragments = Vec::new();
    let mut i = 0;
    while i < summary.len() {
        let mut best_len = 0;
        let mut best_start = 0;
        for j in 0..report.len() {
            if report[j] != summary[i] {
                continue;
            }
            let max = (summary.len() - i).min(report.len() - j);
            if max <= best_len {
                continue;
            }
            let mut k = 1;
            while k < max && summary[i + k] == report[j + k] {
                k += 1;
            }
            if k > best_len {
                best_len = k;
                best_start = j;
                if best_len == summary.len() - i {
                    break;
                }
            }
        }
        if best_len == 0 {
            i += 1;
        } else {
            fragments.push(Fragment::new(i, best_start, best_len));
            i += best_len;
        }
    }
    fragments
}

/// Exact similarity value: `tenths / (10 * summary_len)`.
///
/// Each fragment of length `m` contributes `m + 0.1 m²`, i.e. `10m + m²`
/// tenths, so scores compare and threshold exactly in integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Score {
    pub tenths: u64,
    pub summary_len: u64,
}

impl Score {
    pub fn from_fragments(fragments: &[Fragment], summary_len: usize) -> Self {
        let tenths = fragments
            .iter()
            .map(|f| {
                let m = f.length as u64;
                10 * m + m * m
            })
            .sum();
        Self {
            tenths,
            summary_len: summary_len as u64,
        }
    }

    pub fn zero(summary_len: usize) -> Self {
        Self {
            tenths: 0,
            summary_len: summary_len as u64,
        }
    }

    pub fn value(&self) -> f64 {
        if self.summary_len == 0 {
            return 0.0;
        }
        self.tenths as f64 / (10 * self.summary_len) as f64
    }

    /// Strictly greater than `hundredths / 100`.
    pub fn exceeds_hundredths(&self, hundredths: u64) -> bool {
        // tenths / (10 n) > h / 100  <=>  10 * tenths > h * n
        10 * self.tenths as u128 > hundredths as u128 * self.summary_len as u128
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.tenths as u128 * other.summary_len.max(1) as u128;
        let rhs = other.tenths as u128 * self.summary_len.max(1) as u128;
        lhs.cmp(&rhs)
    }
}

/// Greedy fragments of `summary` in `report` and their exact score.
pub fn score_tokens<T: PartialEq>(summary: &[T], report: &[T]) -> Score {
    Score::from_fragments(&greedy_fragments(summary, report), summary.len())
}
