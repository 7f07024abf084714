use serde::{Deserialize, Serialize};

use crate::text::tokenize;

/// Tokens that mark a true or false final answer. Matching is on whole,
/// lowercased tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerPattern {
    pub true_tokens: Vec<String>,
    pub false_tokens: Vec<String>,
}

impl Default for AnswerPattern {
    fn default() -> Self {
        AnswerPattern { true_tokens: vec!["true".into()], false_tokens: vec!["false".into()] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum AnswerExtraction {
    Answer(bool),
    /// No answer token found; needs manual review.
    Unmatched,
}

/// The last answer token in `text` wins.
pub fn extract_answer(text: &str, pattern: &AnswerPattern) -> AnswerExtraction {
    let lower = |v: &[String]| v.iter().map(|s| s.to_lowercase()).collect::<Vec<_>>();
    let (t, f) = (lower(&pattern.true_tokens), lower(&pattern.false_tokens));
    tokenize(&text.to_lowercase())
        .iter()
        .rev()
        .find_map(|tok| {
            if t.contains(tok) {
                Some(AnswerExtraction::Answer(true))
            } else if f.contains(tok) {
                Some(AnswerExtraction::Answer(false))
            } else {
                None
            }
        })
        .unwrap_or(AnswerExtraction::Unmatched)
}
