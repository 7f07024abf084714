use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AnnotationError;
use crate::jsonl;
use crate::nlsat::ProcessVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgment {
    NoError,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    Factual,
    Reasoning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationVerdict {
    pub instance_id: String,
    /// Model whose output was judged. Empty when a run has a single model.
    #[serde(default)]
    pub model_id: String,
    pub annotator_id: String,
    pub judgment: Judgment,
    pub facet: Facet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

type VerdictKey = (String, String, String, Facet);

impl AnnotationVerdict {
    fn key(&self) -> VerdictKey {
        (self.instance_id.clone(), self.model_id.clone(), self.annotator_id.clone(), self.facet)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationRule {
    /// Not hallucinated only when every annotator found no error.
    AllAnnotatorsNoError,
    /// Not hallucinated only when both answer and reasoning are correct.
    AnswerAndProcess,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallucinationLabel {
    pub instance_id: String,
    #[serde(default)]
    pub model_id: String,
    /// 1 = hallucinated.
    pub label: u8,
    pub rule: AggregationRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

/// Validated verdicts, unique per (instance, model, annotator, facet).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerdictSet {
    verdicts: BTreeMap<VerdictKey, AnnotationVerdict>,
}

impl VerdictSet {
    pub fn insert(&mut self, v: AnnotationVerdict) -> Result<(), AnnotationError> {
        match self.verdicts.get(&v.key()) {
            Some(prev) if prev.judgment != v.judgment => Err(AnnotationError::ConflictingVerdicts {
                instance_id: v.instance_id,
                annotator_id: v.annotator_id,
                facet: v.facet,
            }),
            Some(_) => Ok(()),
            None => {
                self.verdicts.insert(v.key(), v);
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.verdicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AnnotationVerdict> {
        self.verdicts.values()
    }

    /// Verdicts grouped by (instance, model).
    pub fn by_instance(&self) -> BTreeMap<(String, String), Vec<&AnnotationVerdict>> {
        let mut out: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for v in self.verdicts.values() {
            out.entry((v.instance_id.clone(), v.model_id.clone())).or_default().push(v);
        }
        out
    }
}

impl FromIterator<AnnotationVerdict> for Result<VerdictSet, AnnotationError> {
    fn from_iter<I: IntoIterator<Item = AnnotationVerdict>>(iter: I) -> Self {
        let mut set = VerdictSet::default();
        for v in iter {
            set.insert(v)?;
        }
        Ok(set)
    }
}

pub fn ingest_annotations(path: &Path) -> Result<VerdictSet, AnnotationError> {
    let f = std::fs::File::open(path)?;
    ingest_annotations_from(std::io::BufReader::new(f))
}

/// Parses JSONL verdicts. Every malformed row is reported with its line
/// number; identical duplicates collapse, conflicting ones are rejected.
pub fn ingest_annotations_from<R: BufRead>(reader: R) -> Result<VerdictSet, AnnotationError> {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<AnnotationVerdict>(&line) {
            Ok(v) if v.instance_id.is_empty() || v.annotator_id.is_empty() => {
                errors.push(RowError { line: i + 1, message: "instance_id and annotator_id must be non-empty".into() })
            }
            Ok(v) => rows.push(v),
            Err(e) => errors.push(RowError { line: i + 1, message: e.to_string() }),
        }
    }
    if !errors.is_empty() {
        return Err(AnnotationError::Schema(errors));
    }
    rows.into_iter().collect()
}

/// Labels one instance from its verdicts. Every facet present must have
/// exactly two annotators; the output is not hallucinated only if all
/// verdicts are `no_error`.
pub fn aggregate_label(verdicts: &[&AnnotationVerdict]) -> Result<HallucinationLabel, AnnotationError> {
    let first = verdicts.first().ok_or(AnnotationError::MixedInstances)?;
    if verdicts.iter().any(|v| v.instance_id != first.instance_id || v.model_id != first.model_id) {
        return Err(AnnotationError::MixedInstances);
    }
    let mut annotators: BTreeMap<Facet, BTreeSet<&str>> = BTreeMap::new();
    for v in verdicts {
        annotators.entry(v.facet).or_default().insert(&v.annotator_id);
    }
    for (facet, who) in &annotators {
        if who.len() != 2 {
            return Err(AnnotationError::IncompleteAnnotation {
                instance_id: first.instance_id.clone(),
                facet: *facet,
                found: who.len(),
            });
        }
    }
    let clean = verdicts.iter().all(|v| v.judgment == Judgment::NoError);
    Ok(HallucinationLabel {
        instance_id: first.instance_id.clone(),
        model_id: first.model_id.clone(),
        label: u8::from(!clean),
        rule: AggregationRule::AllAnnotatorsNoError,
    })
}

/// One label per (instance, model) in `set`, ordered by key.
pub fn aggregate_set(set: &VerdictSet) -> Result<Vec<HallucinationLabel>, AnnotationError> {
    set.by_instance().values().map(|vs| aggregate_label(vs)).collect()
}

pub fn relational_label(
    instance_id: &str,
    model_id: &str,
    answer_correct: bool,
    process: Option<&ProcessVerdict>,
) -> Result<HallucinationLabel, AnnotationError> {
    let process = process.ok_or_else(|| AnnotationError::MissingProcessVerdict(instance_id.to_string()))?;
    Ok(HallucinationLabel {
        instance_id: instance_id.to_string(),
        model_id: model_id.to_string(),
        label: u8::from(!(answer_correct && process.is_valid())),
        rule: AggregationRule::AnswerAndProcess,
    })
}

/// Share of (instance, model, facet) groups with two annotators whose
/// judgments agree. `None` when there are no such groups.
pub fn percent_agreement(set: &VerdictSet) -> Option<f64> {
    let mut groups: BTreeMap<(&str, &str, Facet), Vec<Judgment>> = BTreeMap::new();
    for v in set.iter() {
        groups.entry((&v.instance_id, &v.model_id, v.facet)).or_default().push(v.judgment);
    }
    let pairs: Vec<_> = groups.values().filter(|j| j.len() == 2).collect();
    if pairs.is_empty() {
        return None;
    }
    let agree = pairs.iter().filter(|j| j[0] == j[1]).count();
    Some(agree as f64 / pairs.len() as f64)
}

pub fn write_labels(path: &Path, labels: &[HallucinationLabel]) -> std::io::Result<()> {
    jsonl::write(path, labels)
}

pub fn read_labels(path: &Path) -> Result<Vec<HallucinationLabel>, AnnotationError> {
    Ok(jsonl::read(path)?)
}
