use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CorpusError, TermIndex, TermMatcher};
use crate::text::normalize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityRecord {
    pub term: String,
    pub article_len: u64,
    pub linked_term_count: u64,
    pub linked_len_sum: u64,
}

/// Length of the term's article plus the number and total article length of
/// the distinct other indexed terms its body mentions.
pub fn complexity_metrics(term: &str, index: &TermIndex, matcher: &TermMatcher) -> Result<ComplexityRecord, CorpusError> {
    let key = normalize(term);
    let entry = index.entries.get(&key).ok_or_else(|| CorpusError::TermNotFound(term.to_string()))?;
    let mut linked = BTreeSet::new();
    matcher.for_each_match(&entry.body, |id, _, _| {
        linked.insert(id);
    });
    let mut linked_term_count = 0;
    let mut linked_len_sum = 0;
    for id in linked {
        let other = matcher.term(id);
        if other == key {
            continue;
        }
        linked_term_count += 1;
        linked_len_sum += index.entries[other].body.len() as u64;
    }
    Ok(ComplexityRecord { term: key, article_len: entry.body.len() as u64, linked_term_count, linked_len_sum })
}
