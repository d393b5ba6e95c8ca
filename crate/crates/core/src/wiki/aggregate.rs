use std::collections::{BTreeMap, HashMap};
use std::fmt;

use chrono::{DateTime, Datelike};
use serde::{Deserialize, Serialize};

use super::EditEvent;
use crate::collection::Collection;
use crate::error::{Error, Result};

/// UTC calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn from_timestamp(ts: i64) -> Result<Self> {
        let dt = DateTime::from_timestamp(ts, 0)
            .ok_or_else(|| Error::domain(format!("timestamp {ts} out of range")))?;
        Ok(YearMonth {
            year: dt.year(),
            month: dt.month(),
        })
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

fn histogram(per_editor: HashMap<&str, u64>) -> Collection {
    let mut c = Collection::new();
    for n in per_editor.into_values() {
        c.add(n, 1).expect("edit counts are positive");
    }
    c
}

/// Per-month histogram of per-editor edit counts within the month.
pub fn monthly_collections(events: &[EditEvent]) -> Result<BTreeMap<YearMonth, Collection>> {
    let mut acc: HashMap<YearMonth, HashMap<&str, u64>> = HashMap::new();
    for e in events {
        let month = YearMonth::from_timestamp(e.timestamp)?;
        *acc.entry(month)
            .or_default()
            .entry(e.editor.as_str())
            .or_insert(0) += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(m, eds)| (m, histogram(eds)))
        .collect())
}

/// Per-page histogram of per-editor edit counts over all time.
pub fn page_collections(events: &[EditEvent]) -> BTreeMap<String, Collection> {
    let mut acc: HashMap<&str, HashMap<&str, u64>> = HashMap::new();
    for e in events {
        *acc.entry(e.page.as_str())
            .or_default()
            .entry(e.editor.as_str())
            .or_insert(0) += 1;
    }
    acc.into_iter()
        .map(|(p, eds)| (p.to_string(), histogram(eds)))
        .collect()
}

/// Edit history of one page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageTimeline {
    pub page_id: String,
    /// `(timestamp, cumulative edits)` in time order.
    pub edits: Vec<(i64, u64)>,
}

impl PageTimeline {
    /// Builds a timeline from unordered edit timestamps.
    pub fn from_timestamps(page_id: impl Into<String>, mut timestamps: Vec<i64>) -> Result<Self> {
        if timestamps.is_empty() {
            return Err(Error::domain("empty page timeline"));
        }
        timestamps.sort_unstable();
        Ok(PageTimeline {
            page_id: page_id.into(),
            edits: timestamps.into_iter().zip(1u64..).collect(),
        })
    }

    pub fn creation_ts(&self) -> i64 {
        self.edits[0].0
    }

    pub fn last_ts(&self) -> i64 {
        self.edits[self.edits.len() - 1].0
    }

    pub fn total_edits(&self) -> u64 {
        self.edits[self.edits.len() - 1].1
    }

    /// Cumulative edits at or before `ts`.
    pub fn edits_until(&self, ts: i64) -> u64 {
        let i = self.edits.partition_point(|&(t, _)| t <= ts);
        if i == 0 {
            0
        } else {
            self.edits[i - 1].1
        }
    }
}

pub fn page_timelines(events: &[EditEvent]) -> BTreeMap<String, PageTimeline> {
    let mut acc: HashMap<&str, Vec<i64>> = HashMap::new();
    for e in events {
        acc.entry(e.page.as_str()).or_default().push(e.timestamp);
    }
    acc.into_iter()
        .map(|(p, ts)| {
            let t = PageTimeline::from_timestamps(p, ts).expect("nonempty by construction");
            (p.to_string(), t)
        })
        .collect()
}

/// Parameters of the saturation rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationParams {
    pub min_edits: u64,
    /// Fraction of the page lifetime forming the final window.
    pub tail_frac: f64,
    /// Growth in the final window must stay below this fraction of all edits.
    pub growth_frac: f64,
}

impl Default for SaturationParams {
    fn default() -> Self {
        SaturationParams {
            min_edits: 4500,
            tail_frac: 0.10,
            growth_frac: 0.05,
        }
    }
}

impl SaturationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_frac > 0.0 && self.tail_frac <= 1.0) {
            return Err(Error::domain("tail_frac must lie in (0, 1]"));
        }
        if !(self.growth_frac > 0.0 && self.growth_frac <= 1.0) {
            return Err(Error::domain("growth_frac must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Whether a page has settled by `horizon_end`.
///
/// Only edits at or before the horizon count. A page is saturated when it has
/// at least `min_edits` of them and the edits falling in the last `tail_frac`
/// of `[creation, horizon_end]` (wall-clock time) are fewer than
/// `growth_frac` of the total.
pub fn saturation_filter(
    t: &PageTimeline,
    horizon_end: i64,
    params: &SaturationParams,
) -> Result<bool> {
    params.validate()?;
    let creation = t.creation_ts();
    if horizon_end < creation {
        return Err(Error::domain(format!(
            "horizon {horizon_end} precedes page creation {creation}"
        )));
    }
    let total = t.edits_until(horizon_end);
    if total < params.min_edits {
        return Ok(false);
    }
    let span = (horizon_end - creation) as f64;
    let tail_start = horizon_end as f64 - params.tail_frac * span;
    let before_tail = t
        .edits
        .iter()
        .take_while(|&&(ts, _)| (ts as f64) < tail_start)
        .last()
        .map_or(0, |&(_, n)| n);
    let tail = total - before_tail;
    Ok((tail as f64) < params.growth_frac * total as f64)
}
