//! Value histograms ("collections") and their probability views.
//!
//! A collection maps individuals to positive integer values. Only the
//! histogram `value -> count` is retained: every metric in this crate is a
//! function of it alone.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Histogram of positive integer values with its total population.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Collection {
    counts: BTreeMap<u64, u64>,
    population: u64,
}

impl Collection {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the histogram of `values`. Any value `<= 0` is rejected.
    pub fn from_values<I>(values: I) -> Result<Self>
    where
        I: IntoIterator<Item = i64>,
    {
        let mut c = Collection::new();
        for v in values {
            if v <= 0 {
                return Err(Error::domain("non-positive contribution value"));
            }
            c.add(v as u64, 1)?;
        }
        Ok(c)
    }

    /// Builds a collection from `(value, count)` pairs. Repeated values are
    /// summed and zero counts are dropped.
    pub fn from_counts<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut c = Collection::new();
        for (v, n) in pairs {
            c.add(v, n)?;
        }
        Ok(c)
    }

    /// Adds `count` individuals holding `value`.
    pub fn add(&mut self, value: u64, count: u64) -> Result<()> {
        if value == 0 {
            return Err(Error::domain("non-positive contribution value"));
        }
        if count == 0 {
            return Ok(());
        }
        *self.counts.entry(value).or_insert(0) += count;
        self.population += count;
        Ok(())
    }

    /// Pointwise sum of two histograms.
    pub fn merge(&self, other: &Collection) -> Collection {
        let mut out = self.clone();
        for (&v, &n) in &other.counts {
            *out.counts.entry(v).or_insert(0) += n;
        }
        out.population += other.population;
        out
    }

    /// Multiplies every count by `k`. `k = 0` yields the empty collection.
    pub fn scaled(&self, k: u64) -> Collection {
        if k == 0 {
            return Collection::new();
        }
        Collection {
            counts: self.counts.iter().map(|(&v, &n)| (v, n * k)).collect(),
            population: self.population * k,
        }
    }

    pub fn population(&self) -> u64 {
        self.population
    }

    pub fn is_empty(&self) -> bool {
        self.population == 0
    }

    /// Number of distinct values.
    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, value: u64) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    pub fn min_value(&self) -> Option<u64> {
        self.counts.keys().next().copied()
    }

    pub fn max_value(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    /// `(value, count)` pairs in ascending value order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&v, &n)| (v, n))
    }

    /// Total value mass `sum_v v * s_v`.
    pub fn total_mass(&self) -> u128 {
        self.iter().map(|(v, n)| v as u128 * n as u128).sum()
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyCollection)
        } else {
            Ok(())
        }
    }

    /// Empirical distribution `p_v = s_v / N`.
    pub fn probabilities(&self) -> Result<Distribution> {
        self.require_nonempty()?;
        let n = self.population as f64;
        Ok(Distribution {
            probs: self.iter().map(|(v, s)| (v, s as f64 / n)).collect(),
        })
    }

    /// Writes the histogram as CSV with header `value,count`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if self.is_empty() {
            w.write_record(["value", "count"])?;
        }
        for (v, n) in self.iter() {
            w.serialize(HistogramRow { value: v, count: n })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `value,count` CSV. Lines starting with `#` are ignored.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut c = Collection::new();
        for row in r.deserialize() {
            let row: HistogramRow = row?;
            c.add(row.value, row.count)?;
        }
        Ok(c)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct HistogramRow {
    value: u64,
    count: u64,
}

/// Probability mass over values.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: BTreeMap<u64, f64>,
}

impl Distribution {
    /// Wraps a pmf, checking positivity and normalization to within `1e-12`.
    pub fn new(probs: BTreeMap<u64, f64>) -> Result<Self> {
        if probs.keys().any(|&v| v == 0) {
            return Err(Error::domain("non-positive contribution value"));
        }
        if probs.values().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::domain("probabilities must lie in (0, 1]"));
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("probabilities sum to {total}")));
        }
        Ok(Distribution { probs })
    }

    pub fn get(&self, value: u64) -> f64 {
        self.probs.get(&value).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&v, &p)| (v, p))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Shannon entropy in nats, with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .values()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    /// Expected energy under `model`.
    pub fn mean_energy(&self, model: EnergyModel) -> f64 {
        self.iter().map(|(v, p)| p * model.energy(v)).sum()
    }
}

/// Mapping from a contribution value to its energy level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyModel {
    /// `u = ln v`
    #[default]
    Logarithmic,
    /// `u = v`
    Linear,
}

impl EnergyModel {
    pub fn energy(self, value: u64) -> f64 {
        match self {
            EnergyModel::Logarithmic => (value as f64).ln(),
            EnergyModel::Linear => value as f64,
        }
    }
}

impl std::str::FromStr for EnergyModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "log" | "logarithmic" => Ok(EnergyModel::Logarithmic),
            "linear" | "lin" => Ok(EnergyModel::Linear),
            other => Err(Error::domain(format!("unknown energy model `{other}`"))),
        }
    }
}

impl std::fmt::Display for EnergyModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnergyModel::Logarithmic => "logarithmic",
            EnergyModel::Linear => "linear",
        })
    }
}
