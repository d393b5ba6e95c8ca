//! Contribution-log pipeline: event ingestion, monthly and per-page
//! collections, page saturation, evolution series and readership
//! correlation.
//!
//! Months are UTC calendar months. Page saturation is measured in wall-clock
//! time since the page's first edit.

mod aggregate;
mod events;
mod report;

pub use aggregate::{
    monthly_collections, page_collections, page_timelines, saturation_filter, PageTimeline,
    SaturationParams, YearMonth,
};
pub use events::{parse_events, parse_readership, EditEvent, ParseMode, Parsed, ReadershipRecord};
pub use report::{
    correlate_metrics, correlate_pages, evolution_report, page_metrics, pearson, CorrelationReport,
    EvolutionCsvRow, EvolutionRow, GroupReport, PageMetrics,
};
