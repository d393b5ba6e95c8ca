use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PageTimeline, ReadershipRecord, SaturationParams, YearMonth};
use crate::collection::{Collection, EnergyModel};
use crate::error::{Error, Result};
use crate::powerlaw::{classify, PowerLawFit};
use crate::structure::{class_decompose, ClassDecomposition, DEFAULT_BASE};
use crate::thermo::{total_energy, ThermoReport};

/// Metrics for one month.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRow {
    pub month: YearMonth,
    pub report: ThermoReport,
    /// Discrete-MLE fit and KS classification; absent without spread.
    pub fit: Option<PowerLawFit>,
    pub classes: ClassDecomposition,
}

/// Flat CSV form: `month,N,S,R,logN,E,Q,alpha,A,fe_ratio`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionCsvRow {
    pub month: String,
    #[serde(rename = "N")]
    pub population: u64,
    #[serde(rename = "S")]
    pub entropy: f64,
    #[serde(rename = "R")]
    pub entropy_reduction: f64,
    #[serde(rename = "logN")]
    pub log_population: f64,
    #[serde(rename = "E")]
    pub avg_energy: f64,
    #[serde(rename = "Q")]
    pub entropy_efficiency: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(rename = "A")]
    pub free_energy: Option<f64>,
    pub fe_ratio: Option<f64>,
}

impl From<&EvolutionRow> for EvolutionCsvRow {
    fn from(row: &EvolutionRow) -> Self {
        let r = &row.report;
        EvolutionCsvRow {
            month: row.month.to_string(),
            population: r.population,
            entropy: r.entropy,
            entropy_reduction: r.entropy_reduction,
            log_population: r.max_entropy(),
            avg_energy: r.avg_energy,
            entropy_efficiency: r.entropy_efficiency,
            alpha: r.alpha,
            free_energy: r.free_energy,
            fe_ratio: r.fe_ratio,
        }
    }
}

/// One row per month, each computed from that month's collection alone.
/// Degenerate months carry absent fields instead of failing the series.
pub fn evolution_report(
    monthly: &BTreeMap<YearMonth, Collection>,
    model: EnergyModel,
    ks_threshold: f64,
) -> Result<Vec<EvolutionRow>> {
    if monthly.is_empty() {
        return Err(Error::domain("no months to report"));
    }
    let months: Vec<(&YearMonth, &Collection)> = monthly.iter().collect();
    months
        .par_iter()
        .map(|&(&month, c)| {
            Ok(EvolutionRow {
                month,
                report: ThermoReport::from_collection(c, model)?,
                fit: classify(c, ks_threshold).ok(),
                classes: class_decompose(c, DEFAULT_BASE)?,
            })
        })
        .collect()
}

/// Per-page metrics. CSV header:
/// `page,N,S,R,E,Q,total_energy,total_edits,alpha,D,is_power_law,saturated`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageMetrics {
    pub page: String,
    /// Number of distinct editors.
    #[serde(rename = "N")]
    pub editors: u64,
    #[serde(rename = "S")]
    pub entropy: f64,
    #[serde(rename = "R")]
    pub entropy_reduction: f64,
    #[serde(rename = "E")]
    pub avg_energy: f64,
    #[serde(rename = "Q")]
    pub entropy_efficiency: Option<f64>,
    /// `sum_v s_v ln v`.
    pub total_energy: f64,
    /// `sum_v s_v v`.
    pub total_edits: u64,
    /// Discrete-MLE exponent used for the KS test.
    pub alpha: Option<f64>,
    #[serde(rename = "D")]
    pub ks: Option<f64>,
    pub is_power_law: Option<bool>,
    pub saturated: Option<bool>,
}

impl PageMetrics {
    pub fn compute(page: &str, c: &Collection, ks_threshold: f64) -> Result<Self> {
        let report = ThermoReport::from_collection(c, EnergyModel::Logarithmic)?;
        let fit = classify(c, ks_threshold).ok();
        Ok(PageMetrics {
            page: page.to_string(),
            editors: c.population(),
            entropy: report.entropy,
            entropy_reduction: report.entropy_reduction,
            avg_energy: report.avg_energy,
            entropy_efficiency: report.entropy_efficiency,
            total_energy: total_energy(c, EnergyModel::Logarithmic),
            total_edits: c.total_mass() as u64,
            alpha: fit.as_ref().map(|f| f.alpha),
            ks: fit.as_ref().map(|f| f.ks),
            is_power_law: fit.map(|f| f.is_power_law),
            saturated: None,
        })
    }

    fn metric(&self, name: Metric) -> Option<f64> {
        match name {
            Metric::Entropy => Some(self.entropy),
            Metric::Reduction => Some(self.entropy_reduction),
            Metric::Efficiency => self.entropy_efficiency,
            Metric::TotalEnergy => Some(self.total_energy),
            Metric::TotalEdits => Some(self.total_edits as f64),
            Metric::Editors => Some(self.editors as f64),
        }
    }
}

/// Metrics for every page. When timelines are supplied each page also gets
/// its saturation flag at `horizon_end`.
pub fn page_metrics(
    pages: &BTreeMap<String, Collection>,
    timelines: Option<(&BTreeMap<String, PageTimeline>, i64, &SaturationParams)>,
    ks_threshold: f64,
) -> Result<Vec<PageMetrics>> {
    let entries: Vec<(&String, &Collection)> = pages.iter().collect();
    entries
        .par_iter()
        .map(|&(page, c)| {
            let mut m = PageMetrics::compute(page, c, ks_threshold)?;
            if let Some((tl, horizon, params)) = timelines {
                if let Some(t) = tl.get(page) {
                    m.saturated = Some(super::saturation_filter(t, horizon, params)?);
                }
            }
            Ok(m)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    Entropy,
    Reduction,
    Efficiency,
    TotalEnergy,
    TotalEdits,
    Editors,
}

impl Metric {
    const CORRELATED: [Metric; 5] = [
        Metric::Entropy,
        Metric::Reduction,
        Metric::Efficiency,
        Metric::TotalEnergy,
        Metric::TotalEdits,
    ];

    fn key(self) -> &'static str {
        match self {
            Metric::Entropy => "S",
            Metric::Reduction => "R",
            Metric::Efficiency => "Q",
            Metric::TotalEnergy => "total_energy",
            Metric::TotalEdits => "total_edits",
            Metric::Editors => "N",
        }
    }
}

/// Product-moment correlation of two equally long sequences.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::domain(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::domain("correlation needs at least 2 points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub size: usize,
    /// rho between readership and each metric (plus editor count `N`).
    pub readership_rho: BTreeMap<String, Option<f64>>,
    /// rho between editor count and each metric.
    pub editors_rho: BTreeMap<String, Option<f64>>,
    pub median_readership: Option<f64>,
    pub mean_readership: Option<f64>,
    pub median_edits: Option<f64>,
    pub mean_edits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub power_law: GroupReport,
    pub non_power_law: GroupReport,
    pub all: GroupReport,
    pub pages_analyzed: usize,
    /// Pages without a readership record.
    pub dropped_pages: usize,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// rho over pages where both values are present; absent when fewer than two
/// such pages exist or either side has zero variance.
fn rho(pairs: impl Iterator<Item = (Option<f64>, f64)>) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.filter_map(|(x, y)| x.map(|x| (x, y))).unzip();
    pearson(&xs, &ys).ok()
}

fn group_report(rows: &[(&PageMetrics, f64)]) -> GroupReport {
    let mut readership_rho = BTreeMap::new();
    let mut editors_rho = BTreeMap::new();
    for m in Metric::CORRELATED {
        readership_rho.insert(
            m.key().to_string(),
            rho(rows.iter().map(|(p, clicks)| (p.metric(m), *clicks))),
        );
        editors_rho.insert(
            m.key().to_string(),
            rho(rows.iter().map(|(p, _)| (p.metric(m), p.editors as f64))),
        );
    }
    readership_rho.insert(
        Metric::Editors.key().to_string(),
        rho(rows
            .iter()
            .map(|(p, clicks)| (p.metric(Metric::Editors), *clicks))),
    );
    let mut clicks: Vec<f64> = rows.iter().map(|(_, c)| *c).collect();
    let mut edits: Vec<f64> = rows.iter().map(|(p, _)| p.total_edits as f64).collect();
    GroupReport {
        size: rows.len(),
        readership_rho,
        editors_rho,
        mean_readership: mean(&clicks),
        median_readership: median(&mut clicks),
        mean_edits: mean(&edits),
        median_edits: median(&mut edits),
    }
}

/// Joins page metrics to readership (inner join; repeated readership rows for
/// a page are summed) and reports group-wise correlations. Pages that could
/// not be classified count as non-power-law.
pub fn correlate_metrics(
    metrics: &[PageMetrics],
    readership: &[ReadershipRecord],
) -> CorrelationReport {
    let mut clicks: HashMap<&str, u64> = HashMap::new();
    for r in readership {
        *clicks.entry(r.page.as_str()).or_insert(0) += r.clicks;
    }
    let joined: Vec<(&PageMetrics, f64)> = metrics
        .iter()
        .filter_map(|m| clicks.get(m.page.as_str()).map(|&c| (m, c as f64)))
        .collect();
    let (pl, non_pl): (Vec<_>, Vec<_>) = joined
        .iter()
        .copied()
        .partition(|(m, _)| m.is_power_law == Some(true));
    CorrelationReport {
        power_law: group_report(&pl),
        non_power_law: group_report(&non_pl),
        all: group_report(&joined),
        pages_analyzed: joined.len(),
        dropped_pages: metrics.len() - joined.len(),
    }
}

/// Classifies every page, computes its metrics and correlates them with
/// readership.
pub fn correlate_pages(
    pages: &BTreeMap<String, Collection>,
    readership: &[ReadershipRecord],
    ks_threshold: f64,
) -> Result<CorrelationReport> {
    let metrics = page_metrics(pages, None, ks_threshold)?;
    Ok(correlate_metrics(&metrics, readership))
}
