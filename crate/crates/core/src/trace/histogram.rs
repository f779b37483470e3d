use serde::{Deserialize, Serialize};

use super::classify::{AttributionClass, SentenceAttribution};
use super::TraceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramSource {
    /// 1-1 sources only.
    Extractive,
    /// 1-1 sources plus the mean position of each 2-1 pair.
    WithSynthesizing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionHistogram {
    pub n_bins: usize,
    pub bins: Vec<HistogramBin>,
    pub attributed: usize,
    /// Set when no sentence contributed; every mass is then zero.
    pub empty: bool,
}

impl PositionHistogram {
    /// `bin_lo,bin_hi,mass` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,mass\n");
        for b in &self.bins {
            out.push_str(&format!("{},{},{}\n", b.lo, b.hi, b.mass));
        }
        out
    }
}

/// Histogram of source positions over `[0, 1]` in `n_bins` equal bins.
///
/// Bin assignment uses the exact rational position (source index over
/// report length), so sources on a bin edge land in the upper bin.
pub fn position_histogram(
    attributions: &[SentenceAttribution],
    n_bins: usize,
    source: HistogramSource,
) -> Result<PositionHistogram, TraceError> {
    if n_bins < 2 {
        return Err(TraceError::InvalidBins(n_bins));
    }
    let mut counts = vec![0usize; n_bins];
    for a in attributions {
        let include = match a.class {
            AttributionClass::Extractive11 => true,
            AttributionClass::Synthesizing21 => source == HistogramSource::WithSynthesizing,
            AttributionClass::Abstractive => false,
        };
        if !include || a.sources.is_empty() || a.report_units == 0 {
            continue;
        }
        // position = Σ sources / (|sources| · units)
        let numer: usize = a.sources.iter().sum();
        let denom = a.sources.len() * a.report_units;
        let bin = (numer * n_bins / denom).min(n_bins - 1);
        counts[bin] += 1;
    }
    let attributed: usize = counts.iter().sum();
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistogramBin {
            lo: i as f64 / n_bins as f64,
            hi: (i + 1) as f64 / n_bins as f64,
            mass: if attributed == 0 {
                0.0
            } else {
                count as f64 / attributed as f64
            },
            count,
        })
        .collect();
    Ok(PositionHistogram {
        n_bins,
        bins,
        attributed,
        empty: attributed == 0,
    })
}
