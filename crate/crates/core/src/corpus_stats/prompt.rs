use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::probe::{ProbeInstance, TaskKind};

const PLACEHOLDER: &str = "{term}";

/// Templates shipped by default. The exact wording used in the original
/// experiments is not public; these are reconstructions.
pub const DEFAULT_TEMPLATES: [(&str, &str); 2] =
    [("explain", "Please explain the term {term}."), ("describe", "Please describe {term}.")];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: String,
    pub text: String,
}

impl PromptTemplate {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self, CorpusError> {
        let t = PromptTemplate { id: id.into(), text: text.into() };
        t.validate()?;
        Ok(t)
    }

    /// Looks up a shipped template by id.
    pub fn builtin(id: &str) -> Option<Self> {
        DEFAULT_TEMPLATES
            .iter()
            .find(|(k, _)| *k == id)
            .map(|(k, v)| PromptTemplate { id: k.to_string(), text: v.to_string() })
    }

    fn validate(&self) -> Result<(), CorpusError> {
        let found = self.text.matches(PLACEHOLDER).count();
        if found != 1 {
            return Err(CorpusError::BadTemplate { id: self.id.clone(), found });
        }
        Ok(())
    }
}

/// Fills the template with `term`. The reference answer is the term's
/// article text, given to annotators as an aid.
pub fn render_commonsense_prompt(
    id: impl Into<String>,
    term: &str,
    reference: &str,
    template: &PromptTemplate,
) -> Result<ProbeInstance, CorpusError> {
    template.validate()?;
    let prompt = template.text.replace(PLACEHOLDER, term);
    Ok(ProbeInstance {
        id: id.into(),
        task: TaskKind::CommonsenseQa,
        context: String::new(),
        instruction: prompt.clone(),
        prompt,
        reference: reference.to_string(),
        factors: BTreeMap::new(),
    })
}

/// Renders one instance per `(term, reference, factors)` with ids
/// `cqa-0000`, `cqa-0001`, ... in input order.
pub fn render_commonsense_batch(
    items: &[(String, String, BTreeMap<String, f64>)],
    template: &PromptTemplate,
) -> Result<Vec<ProbeInstance>, CorpusError> {
    items
        .iter()
        .enumerate()
        .map(|(i, (term, reference, factors))| {
            let mut inst = render_commonsense_prompt(format!("cqa-{i:04}"), term, reference, template)?;
            inst.factors = factors.clone();
            Ok(inst)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitutes_term() {
        let t = PromptTemplate::builtin("explain").unwrap();
        let inst = render_commonsense_prompt("x", "phlogiston", "ref", &t).unwrap();
        assert_eq!(inst.prompt, "Please explain the term phlogiston.");
        assert_eq!(inst.task, TaskKind::CommonsenseQa);
        assert_eq!(PromptTemplate::builtin("describe").unwrap().text.replace("{term}", "x"), "Please describe x.");
    }

    #[test]
    fn placeholder_count_must_be_one() {
        assert!(matches!(PromptTemplate::new("z", "No placeholder."), Err(CorpusError::BadTemplate { found: 0, .. })));
        assert!(matches!(PromptTemplate::new("z", "{term} {term}"), Err(CorpusError::BadTemplate { found: 2, .. })));
        let raw = PromptTemplate { id: "raw".into(), text: "none".into() };
        assert!(render_commonsense_prompt("x", "t", "", &raw).is_err());
    }

    #[test]
    fn batch_preserves_count_with_unique_ids() {
        let items: Vec<_> = (0..200).map(|i| (format!("term{i}"), String::new(), BTreeMap::new())).collect();
        let out = render_commonsense_batch(&items, &PromptTemplate::builtin("explain").unwrap()).unwrap();
        assert_eq!(out.len(), 200);
        let ids: std::collections::BTreeSet<_> = out.iter().map(|i| &i.id).collect();
        assert_eq!(ids.len(), 200);
    }
}
