use rust_decimal::prelude::ToPrimitive;
use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};

use super::extract::{NumericMention, Scale};
use super::index::NumberIndex;

/// Largest number of decimal places a rounded summary value may carry.
pub const MAX_ROUNDING_DP: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivedOpKind {
    Rounding,
    UnitRescale,
    Difference,
    Sum,
    RateOfChange,
}

/// Which report number pairs may combine into one derived value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Locality {
    /// Also pair a table with the paragraph directly before or after it.
    pub adjacent_tables: bool,
}

impl Default for Locality {
    fn default() -> Self {
        Self {
            adjacent_tables: true,
        }
    }
}

impl Locality {
    pub fn allows(&self, a: &NumericMention, b: &NumericMention) -> bool {
        let (Some(pa), Some(pb)) = (a.container.paragraph_index(), b.container.paragraph_index()) else {
            return false;
        };
        pa == pb
            || (self.adjacent_tables
                && pa.abs_diff(pb) == 1
                && (a.container.is_table() || b.container.is_table()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedOpExplanation {
    pub kind: DerivedOpKind,
    pub operands: Vec<NumericMention>,
    /// Result of the operation before comparison with the summary value.
    pub computed: Decimal,
    /// `|summary − computed| / |computed|`, or the absolute gap when
    /// `computed` is zero.
    pub error: f64,
    /// For rounding: whether half-up rounding of the operand gives the
    /// summary value.
    pub correct: Option<bool>,
    /// For unit rescaling: the factor applied to the operand.
    pub factor: Option<Decimal>,
}

impl DerivedOpExplanation {
    fn new(kind: DerivedOpKind, operands: Vec<NumericMention>, computed: Decimal, m: &NumericMention) -> Self {
        let gap = (m.value - computed).abs();
        let error = if computed.is_zero() {
            gap
        } else {
            gap / computed.abs()
        };
        Self {
            kind,
            operands,
            computed,
            error: error.to_f64().unwrap_or(f64::INFINITY),
            correct: None,
            factor: None,
        }
    }

    /// Recomputes the claim from the operands and checks it against `m`.
    pub fn verify(&self, m: &NumericMention) -> bool {
        let dp = m.value.scale();
        match (self.kind, self.operands.as_slice()) {
            (DerivedOpKind::Rounding, [r]) => {
                let rounded = half_up(r.value, dp);
                dp <= MAX_ROUNDING_DP
                    && (r.value - m.value).abs() < unit(dp)
                    && rounded == self.computed
                    && self.correct == Some(rounded == m.value)
            }
            (DerivedOpKind::UnitRescale, [r]) => self.factor.is_some_and(|f| {
                r.value
                    .checked_mul(f)
                    .is_some_and(|v| half_up(v, dp) == m.value && half_up(v, dp) == self.computed)
            }),
            (DerivedOpKind::Difference, [a, b]) => {
                let exact = (a.value - b.value).abs();
                exact == self.computed && equal_or_rounds_to(exact, m.value)
            }
            (DerivedOpKind::Sum, [a, b]) => a.value.checked_add(b.value).is_some_and(|exact| {
                exact == self.computed && equal_or_rounds_to(exact, m.value)
            }),
            (DerivedOpKind::RateOfChange, [a, b]) => {
                rate_of_change(a.value, b.value).is_some_and(|rate| {
                    rate == self.computed && (rate - m.value).abs() <= rate_tolerance()
                })
            }
            _ => false,
        }
    }
}

fn unit(dp: u32) -> Decimal {
    Decimal::new(1, dp)
}

fn rate_tolerance() -> Decimal {
    Decimal::new(5, 2)
}

pub fn half_up(v: Decimal, dp: u32) -> Decimal {
    v.round_dp_with_strategy(dp, RoundingStrategy::MidpointAwayFromZero)
}

fn equal_or_rounds_to(exact: Decimal, target: Decimal) -> bool {
    exact == target || (target.scale() <= MAX_ROUNDING_DP && half_up(exact, target.scale()) == target)
}

/// `|a − b| / |b|` in percent.
fn rate_of_change(a: Decimal, b: Decimal) -> Option<Decimal> {
    if b.is_zero() {
        return None;
    }
    (a - b)
        .abs()
        .checked_div(b.abs())?
        .checked_mul(Decimal::ONE_HUNDRED)
}

/// Scales are compatible when every known one agrees; `None` is a wildcard.
fn compatible(scales: &[Scale]) -> bool {
    let mut known = scales.iter().filter(|s| **s != Scale::None);
    match known.next() {
        Some(first) => known.all(|s| s == first),
        None => true,
    }
}

fn rescale_factors(r: Scale, m: Scale) -> Vec<Decimal> {
    let all = [
        Decimal::from(1_000),
        Decimal::from(1_000_000),
        Decimal::new(1, 3),
        Decimal::new(1, 6),
    ];
    match (r, m) {
        (Scale::Percent, _) | (_, Scale::Percent) => Vec::new(),
        (Scale::None, _) | (_, Scale::None) => all.to_vec(),
        (r, m) => {
            let f = r.multiplier() / m.multiplier();
            all.into_iter().filter(|x| *x == f).collect()
        }
    }
}

fn rounding(m: &NumericMention, index: &NumberIndex) -> Option<DerivedOpExplanation> {
    let dp = m.value.scale();
    if dp > MAX_ROUNDING_DP {
        return None;
    }
    let mut incorrect = None;
    for r in index.mentions() {
        if !compatible(&[r.scale, m.scale]) || (r.value - m.value).abs() >= unit(dp) {
            continue;
        }
        let rounded = half_up(r.value, dp);
        let mut e = DerivedOpExplanation::new(DerivedOpKind::Rounding, vec![r.clone()], rounded, m);
        e.correct = Some(rounded == m.value);
        if rounded == m.value {
            return Some(e);
        }
        incorrect.get_or_insert(e);
    }
    incorrect
}

fn unit_rescale(m: &NumericMention, index: &NumberIndex) -> Option<DerivedOpExplanation> {
    let dp = m.value.scale();
    for r in index.mentions() {
        for f in rescale_factors(r.scale, m.scale) {
            let Some(v) = r.value.checked_mul(f) else {
                continue;
            };
            if half_up(v, dp) == m.value {
                let mut e = DerivedOpExplanation::new(DerivedOpKind::UnitRescale, vec![r.clone()], m.value, m);
                e.factor = Some(f);
                return Some(e);
            }
        }
    }
    None
}

fn local_pairs<'a>(
    index: &'a NumberIndex,
    window: &'a Locality,
) -> impl Iterator<Item = (&'a NumericMention, &'a NumericMention)> {
    let ms = index.mentions();
    (0..ms.len()).flat_map(move |i| {
        (i + 1..ms.len())
            .filter(move |&j| window.allows(&ms[i], &ms[j]))
            .map(move |j| (&ms[i], &ms[j]))
    })
}

fn difference_or_sum(m: &NumericMention, index: &NumberIndex, window: &Locality) -> Option<DerivedOpExplanation> {
    for (a, b) in local_pairs(index, window) {
        if !compatible(&[a.scale, b.scale, m.scale]) {
            continue;
        }
        let diff = (a.value - b.value).abs();
        if equal_or_rounds_to(diff, m.value) {
            return Some(DerivedOpExplanation::new(
                DerivedOpKind::Difference,
                vec![a.clone(), b.clone()],
                diff,
                m,
            ));
        }
        if let Some(sum) = a.value.checked_add(b.value) {
            if equal_or_rounds_to(sum, m.value) {
                return Some(DerivedOpExplanation::new(DerivedOpKind::Sum, vec![a.clone(), b.clone()], sum, m));
            }
        }
    }
    None
}

fn rate(m: &NumericMention, index: &NumberIndex, window: &Locality) -> Option<DerivedOpExplanation> {
    if !m.is_percent() {
        return None;
    }
    for (x, y) in local_pairs(index, window) {
        if x.is_percent() || y.is_percent() || !compatible(&[x.scale, y.scale]) {
            continue;
        }
        // Either number may be the base.
        for (a, b) in [(x, y), (y, x)] {
            if let Some(r) = rate_of_change(a.value, b.value) {
                if (r - m.value).abs() <= rate_tolerance() {
                    return Some(DerivedOpExplanation::new(
                        DerivedOpKind::RateOfChange,
                        vec![a.clone(), b.clone()],
                        r,
                        m,
                    ));
                }
            }
        }
    }
    None
}

/// Tries to explain a summary number absent from the report as a simple
/// operation on report numbers: rounding, unit rescaling, a difference or sum
/// of two nearby numbers, then a rate of change. The first kind that fits
/// wins; a correct rounding is preferred over an incorrect one.
pub fn explain_type_d(m: &NumericMention, index: &NumberIndex, window: &Locality) -> Option<DerivedOpExplanation> {
    rounding(m, index)
        .or_else(|| unit_rescale(m, index))
        .or_else(|| difference_or_sum(m, index, window))
        .or_else(|| rate(m, index, window))
}
