//! Term frequency and descriptive-complexity statistics over a
//! WikiText-style corpus, low-frequency term sampling and commonsense QA
//! prompt rendering.

mod complexity;
mod frequency;
mod index;
mod matcher;
mod prompt;
mod sample;
pub mod synthetic;

use std::io;

pub use complexity::{complexity_metrics, ComplexityRecord};
pub use frequency::{count_frequencies, percentile_ranks, FrequencyRecord};
pub use index::{build_term_index, load_corpus, read_jsonl_corpus, read_wikitext, Article, TermEntry, TermIndex};
pub use matcher::TermMatcher;
pub use prompt::{render_commonsense_batch, render_commonsense_prompt, PromptTemplate, DEFAULT_TEMPLATES};
pub use sample::{sample_low_frequency_terms, DEFAULT_PERCENTILE};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus contains no articles")]
    EmptyCorpus,
    #[error("term `{0}` is not in the index")]
    TermNotFound(String),
    #[error("only {available} terms fall under the percentile threshold, {requested} requested")]
    InsufficientTerms { requested: usize, available: usize },
    #[error("percentile must lie in (0, 1], got {0}")]
    InvalidPercentile(f64),
    #[error("template `{id}` must contain exactly one `{{term}}` placeholder, found {found}")]
    BadTemplate { id: String, found: usize },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}
