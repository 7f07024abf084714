//! Coefficient tables, hallucination-rate summaries and the run bundle.

mod bundle;
mod rates;
mod svg;
mod table;

pub use bundle::{file_digest, Provenance, ReportBundle};
pub use rates::{quantile_bins, rate_summary, wilson_interval, RateEstimate, RateRow, RateSummary, WILSON_Z95};
pub use svg::render_rates_svg;
pub use table::{coefficient_table, format_beta, CoefficientTable, TableCell};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("nothing to report")]
    EmptyReport,
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for ReportError {
    fn from(e: csv::Error) -> Self {
        ReportError::Csv(e.to_string())
    }
}
