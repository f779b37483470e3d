use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::record::{AnnotationRecord, HallucinationLabel};
use super::AuditError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsFilter {
    pub model: Option<String>,
    pub prompt: Option<String>,
}

impl StatsFilter {
    pub fn accepts(&self, r: &AnnotationRecord) -> bool {
        self.model.as_ref().map_or(true, |m| *m == r.model) && self.prompt.as_ref().map_or(true, |p| *p == r.prompt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HallucinationStats {
    /// Non-pending records under the filter.
    pub annotated: usize,
    pub pending: usize,
    pub counts: BTreeMap<HallucinationLabel, usize>,
    /// Share of annotated numbers per label, in percent.
    pub percents: BTreeMap<HallucinationLabel, f64>,
    /// Sum of the hallucination-type percentages.
    pub total_rate: f64,
}

impl HallucinationStats {
    pub fn count(&self, label: HallucinationLabel) -> usize {
        self.counts.get(&label).copied().unwrap_or(0)
    }

    pub fn percent(&self, label: HallucinationLabel) -> f64 {
        self.percents.get(&label).copied().unwrap_or(0.0)
    }

    pub fn hallucinated(&self) -> usize {
        HallucinationLabel::HALLUCINATIONS.iter().map(|l| self.count(*l)).sum()
    }
}

const JUDGED: [HallucinationLabel; 5] = [
    HallucinationLabel::NoHallucination,
    HallucinationLabel::FabricatedNumber,
    HallucinationLabel::ArithmeticError,
    HallucinationLabel::RoundingError,
    HallucinationLabel::ContextMismatch,
];

pub fn hallucination_stats<'a>(
    records: impl IntoIterator<Item = &'a AnnotationRecord>,
    filter: &StatsFilter,
) -> Result<HallucinationStats, AuditError> {
    let mut counts: BTreeMap<HallucinationLabel, usize> = JUDGED.iter().map(|l| (*l, 0)).collect();
    let mut pending = 0;
    for r in records.into_iter().filter(|r| filter.accepts(r)) {
        match r.label {
            HallucinationLabel::Pending => pending += 1,
            l => *counts.entry(l).or_default() += 1,
        }
    }
    let annotated: usize = counts.values().sum();
    if annotated == 0 {
        return Err(AuditError::NoAnnotations);
    }
    let percents: BTreeMap<_, _> = counts
        .iter()
        .map(|(l, c)| (*l, *c as f64 * 100.0 / annotated as f64))
        .collect();
    let total_rate = HallucinationLabel::HALLUCINATIONS.iter().map(|l| percents[l]).sum();
    Ok(HallucinationStats {
        annotated,
        pending,
        counts,
        percents,
        total_rate,
    })
}

/// Stats per `(model, prompt)` group that has at least one judged record.
pub fn grouped_stats<'a>(
    records: impl IntoIterator<Item = &'a AnnotationRecord>,
) -> BTreeMap<(String, String), HallucinationStats> {
    let mut groups: BTreeMap<(String, String), Vec<&AnnotationRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.model.clone(), r.prompt.clone())).or_default().push(r);
    }
    groups
        .into_iter()
        .filter_map(|(g, rs)| hallucination_stats(rs, &StatsFilter::default()).ok().map(|s| (g, s)))
        .collect()
}

/// Hallucination type by group: one `pct`/`count` column pair per group,
/// then a total row and the number of annotated values.
pub fn stats_table_csv(groups: &BTreeMap<(String, String), HallucinationStats>) -> String {
    let mut header = vec!["type".to_string()];
    for (model, prompt) in groups.keys() {
        header.push(format!("{model}/{prompt} pct"));
        header.push(format!("{model}/{prompt} count"));
    }
    let mut lines = vec![header.join(",")];
    for label in HallucinationLabel::HALLUCINATIONS {
        let mut row = vec![label.title().to_string()];
        for s in groups.values() {
            row.push(format!("{:.2}", s.percent(label)));
            row.push(s.count(label).to_string());
        }
        lines.push(row.join(","));
    }
    let mut total = vec!["Total".to_string()];
    let mut annotated = vec!["Annotated".to_string()];
    for s in groups.values() {
        total.push(format!("{:.2}", s.total_rate));
        total.push(s.hallucinated().to_string());
        annotated.push("100.00".into());
        annotated.push(s.annotated.to_string());
    }
    lines.push(total.join(","));
    lines.push(annotated.join(","));
    lines.join("\n") + "\n"
}
