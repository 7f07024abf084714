use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{likelihood_diff, CnliError, CnliInstance, NliLabel, PllScorer, ReasoningChain, StatementPair};
use crate::probe::{ProbeInstance, TaskKind};
use crate::text::tokenize;

pub const CNLI_TEMPLATES: [(&str, &str); 2] = [
    (
        "assume",
        "Assume every premise below is true, even where it disagrees with what you know about the world.\n\
Premises: {premises}\nHypothesis: {hypothesis}\n\
Given only the premises, is the hypothesis an entailment or a contradiction? \
Explain your reasoning, then answer with one word: entailment or contradiction.",
    ),
    (
        "direct",
        "Premises: {premises}\nHypothesis: {hypothesis}\n\
Answer with one word, entailment or contradiction.",
    ),
];

/// Inclusive per-statement token bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthWindow {
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for LengthWindow {
    fn default() -> Self {
        LengthWindow { min_tokens: 5, max_tokens: 25 }
    }
}

impl LengthWindow {
    pub fn admits(&self, text: &str) -> bool {
        (self.min_tokens..=self.max_tokens).contains(&tokenize(text).len())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildReport {
    /// (chain id, reason) for every chain left out.
    pub skipped: Vec<(String, String)>,
}

fn prompted_len(premises: &[StatementPair], baseline: bool) -> usize {
    premises
        .iter()
        .map(|p| tokenize(if baseline { &p.factual_text } else { &p.counterfactual_text }).len())
        .sum()
}

/// Builds one counterfactual instance and its factual baseline per chain
/// whose statements and conclusion all have verified pairs within the
/// length window.
///
/// Gold labels alternate by chain position: even chains ask about the
/// flipped conclusion (entailment under flipped premises), odd chains ask
/// about the original conclusion (contradiction). Baselines take the
/// other hypothesis so their labels match.
pub fn build_instances(
    chains: &[ReasoningChain],
    pairs: &[StatementPair],
    scorer: &dyn PllScorer,
    window: LengthWindow,
) -> Result<(Vec<CnliInstance>, BuildReport), CnliError> {
    let by_id: HashMap<&str, &StatementPair> = pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();
    let mut out = Vec::new();
    let mut report = BuildReport::default();
    for (ci, chain) in chains.iter().enumerate() {
        let ids: Vec<String> = (0..chain.statements.len()).map(|i| chain.statement_pair_id(i)).collect();
        let conclusion_id = chain.conclusion_pair_id();
        let lookup: Option<Vec<&StatementPair>> =
            ids.iter().chain([&conclusion_id]).map(|id| by_id.get(id.as_str()).copied()).collect();
        let Some(found) = lookup else {
            report.skipped.push((chain.chain_id.clone(), "missing pair".into()));
            continue;
        };
        if let Some(p) = found.iter().find(|p| !p.verified) {
            report.skipped.push((chain.chain_id.clone(), format!("pair `{}` unverified", p.pair_id)));
            continue;
        }
        let (premise_refs, conclusion) = found.split_at(ids.len());
        let conclusion = conclusion[0];
        if let Some(p) = premise_refs
            .iter()
            .find(|p| !window.admits(&p.factual_text) || !window.admits(&p.counterfactual_text))
        {
            report.skipped.push((chain.chain_id.clone(), format!("pair `{}` outside length window", p.pair_id)));
            continue;
        }
        let premises: Vec<StatementPair> = premise_refs.iter().map(|&p| p.clone()).collect();
        let diff = likelihood_diff(&premises, scorer)?;
        let even = ci % 2 == 0;
        let (cf_hyp, cf_label, base_hyp, base_label) = if even {
            (&conclusion.counterfactual_text, NliLabel::Entailment, &conclusion.factual_text, NliLabel::Entailment)
        } else {
            (&conclusion.factual_text, NliLabel::Contradiction, &conclusion.counterfactual_text, NliLabel::Contradiction)
        };
        out.push(CnliInstance {
            id: format!("cnli-{}", chain.chain_id),
            premise_len: prompted_len(&premises, false),
            premises: premises.clone(),
            hypothesis: cf_hyp.clone(),
            gold_label: cf_label,
            likelihood_diff: diff,
            source_chain_id: chain.chain_id.clone(),
            is_baseline: false,
        });
        out.push(CnliInstance {
            id: format!("cnli-{}-base", chain.chain_id),
            premise_len: prompted_len(&premises, true),
            premises,
            hypothesis: base_hyp.clone(),
            gold_label: base_label,
            likelihood_diff: 0.0,
            source_chain_id: chain.chain_id.clone(),
            is_baseline: true,
        });
    }
    Ok((out, report))
}

pub fn build_cnli_prompt(instance: &CnliInstance, template_id: &str) -> Result<ProbeInstance, CnliError> {
    if instance.premises.iter().any(|p| !p.verified) {
        return Err(CnliError::UnverifiedInstance(instance.id.clone()));
    }
    let template = CNLI_TEMPLATES
        .iter()
        .find(|(id, _)| *id == template_id)
        .map(|(_, t)| *t)
        .ok_or_else(|| CnliError::UnknownTemplate(template_id.to_string()))?;
    let premises = instance.prompted_premises().join(" ");
    let prompt = template.replace("{premises}", &premises).replace("{hypothesis}", &instance.hypothesis);
    let mut factors = BTreeMap::new();
    factors.insert("likelihood_diff".to_string(), instance.likelihood_diff);
    factors.insert("premise_len".to_string(), instance.premise_len as f64);
    Ok(ProbeInstance {
        id: instance.id.clone(),
        task: TaskKind::Cnli,
        context: premises,
        instruction: template.split("\n").next().unwrap_or_default().to_string(),
        prompt,
        reference: instance.gold_label.as_str().to_string(),
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{text_digest, FileScores, ScoreRecord};
    use super::*;

    fn pair(id: &str, f: &str, c: &str) -> StatementPair {
        StatementPair {
            pair_id: id.into(),
            chain_id: id.split(':').next().unwrap().into(),
            factual_text: f.into(),
            counterfactual_text: c.into(),
            verified: true,
            proposal_prompt: String::new(),
            proposal_digest: None,
        }
    }

    fn fixture() -> (Vec<ReasoningChain>, Vec<StatementPair>, FileScores) {
        let chains = vec![
            ReasoningChain {
                chain_id: "q1".into(),
                statements: vec!["Copper wire is made of metal.".into(), "Every metal conducts electricity well.".into()],
                conclusion: "Copper wire conducts electricity.".into(),
            },
            ReasoningChain {
                chain_id: "q2".into(),
                statements: vec!["Plants need sunlight to grow well.".into()],
                conclusion: "Plants grow in light.".into(),
            },
        ];
        let pairs = vec![
            pair("q1:s0", "Copper wire is made of metal.", "Copper wire is made of plastic."),
            pair("q1:s1", "Every metal conducts electricity well.", "No metal conducts electricity at all."),
            pair("q1:c", "Copper wire conducts electricity.", "Copper wire does not conduct electricity."),
            pair("q2:s0", "Plants need sunlight to grow well.", "Plants need darkness to grow well."),
            pair("q2:c", "Plants grow in light.", "Plants grow in darkness."),
        ];
        let pll = [
            ("Copper wire is made of metal.", -12.0),
            ("Copper wire is made of plastic.", -15.5),
            ("Every metal conducts electricity well.", -20.0),
            ("No metal conducts electricity at all.", -26.0),
            ("Plants need sunlight to grow well.", -18.0),
            ("Plants need darkness to grow well.", -23.25),
        ];
        let recs = pll.iter().map(|(t, p)| ScoreRecord { text_digest: text_digest(t), pll: *p, model_tag: "rl".into() }).collect();
        (chains, pairs, FileScores::new("rl", recs))
    }

    #[test]
    fn instances_and_baselines() {
        let (chains, pairs, scores) = fixture();
        let (inst, report) = build_instances(&chains, &pairs, &scores, LengthWindow::default()).unwrap();
        assert!(report.skipped.is_empty());
        assert_eq!(inst.len(), 4);
        assert_eq!(inst[0].likelihood_diff, 3.5 + 6.0);
        assert_eq!(inst[0].gold_label, NliLabel::Entailment);
        assert_eq!(inst[0].hypothesis, "Copper wire does not conduct electricity.");
        assert_eq!(inst[1].likelihood_diff, 0.0);
        assert!(inst[1].is_baseline);
        assert_eq!(inst[1].hypothesis, "Copper wire conducts electricity.");
        assert_eq!(inst[2].gold_label, NliLabel::Contradiction);
        assert_eq!(inst[2].likelihood_diff, 5.25);
        assert_eq!(inst[2].premise_len, 6);
    }

    #[test]
    fn unverified_and_short_chains_skipped() {
        let (chains, mut pairs, scores) = fixture();
        pairs[4].verified = false;
        let (inst, report) = build_instances(&chains, &pairs, &scores, LengthWindow::default()).unwrap();
        assert_eq!(inst.len(), 2);
        assert_eq!(report.skipped[0].0, "q2");
        pairs[4].verified = true;
        let tight = LengthWindow { min_tokens: 7, max_tokens: 25 };
        let (inst, report) = build_instances(&chains, &pairs, &scores, tight).unwrap();
        assert!(inst.is_empty());
        assert_eq!(report.skipped.len(), 2);
    }

    #[test]
    fn prompt_rendering() {
        let (chains, pairs, scores) = fixture();
        let (mut inst, _) = build_instances(&chains, &pairs, &scores, LengthWindow::default()).unwrap();
        let p = build_cnli_prompt(&inst[0], "assume").unwrap();
        assert!(p.prompt.contains("Copper wire is made of plastic. No metal conducts electricity at all."));
        assert!(p.prompt.contains("Hypothesis: Copper wire does not conduct electricity."));
        assert_eq!(p.reference, "entailment");
        assert_eq!(p.factors["likelihood_diff"], 9.5);
        assert_eq!(p, build_cnli_prompt(&inst[0], "assume").unwrap());
        let b = build_cnli_prompt(&inst[1], "direct").unwrap();
        assert!(b.prompt.starts_with("Premises: Copper wire is made of metal."));
        assert!(matches!(build_cnli_prompt(&inst[0], "nope"), Err(CnliError::UnknownTemplate(_))));
        inst[0].premises[1].verified = false;
        assert!(matches!(build_cnli_prompt(&inst[0], "assume"), Err(CnliError::UnverifiedInstance(_))));
    }
}
