//! End-to-end run: prepare probes, query models, derive labels, fit the
//! association model and write the report bundle.

mod config;
mod stages;

use std::fmt;

pub use config::{CnliSection, CommonsenseSection, ProviderKind, RelationalSection, RunConfig};
pub use stages::{default_factor_spec, ModelFit, Pipeline, ReviewItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Prepare,
    Query,
    Annotate,
    Fit,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Prepare, Stage::Query, Stage::Annotate, Stage::Fit, Stage::Report];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Prepare => "prepare",
            Stage::Query => "query",
            Stage::Annotate => "annotate",
            Stage::Fit => "fit",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: BoxError,
}

impl PipelineError {
    pub fn new(stage: Stage, source: impl Into<BoxError>) -> Self {
        PipelineError { stage, source: source.into() }
    }
}
