//! Human annotation verdicts and the hallucination labels derived from them.

mod answer;
mod verdict;

pub use answer::{extract_answer, AnswerExtraction, AnswerPattern};
pub use verdict::{
    aggregate_label, aggregate_set, ingest_annotations, ingest_annotations_from, percent_agreement, read_labels,
    relational_label, write_labels, AggregationRule, AnnotationVerdict, Facet, HallucinationLabel, Judgment, RowError,
    VerdictSet,
};

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("{} malformed row(s); first at line {}: {}", .0.len(), .0[0].line, .0[0].message)]
    Schema(Vec<RowError>),
    #[error("conflicting verdicts for instance `{instance_id}`, annotator `{annotator_id}`, facet {facet:?}")]
    ConflictingVerdicts { instance_id: String, annotator_id: String, facet: Facet },
    #[error("instance `{instance_id}` has {found} annotator(s) for facet {facet:?}, expected 2")]
    IncompleteAnnotation { instance_id: String, facet: Facet, found: usize },
    #[error("instance `{0}` has no process verdict")]
    MissingProcessVerdict(String),
    #[error("verdicts for one label must share instance and model")]
    MixedInstances,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Jsonl(#[from] crate::jsonl::JsonlError),
}
