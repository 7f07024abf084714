use super::{CnliError, ReasoningChain, StatementPair};
use crate::llm_gateway::{Gateway, LlmRequest};
use crate::text::normalize;

pub fn counterfactual_prompt(factual_text: &str) -> String {
    format!(
        "Rewrite the statement below so that it asserts the opposite of what it says. \
Change as few words as possible and reply with the rewritten statement only.\n\
Statement: {factual_text}"
    )
}

/// Asks the model for a counterfactual version of `factual_text`. The pair
/// comes back unverified.
pub fn propose_counterfactual(
    pair_id: &str,
    chain_id: &str,
    factual_text: &str,
    gateway: &Gateway,
    model_id: &str,
) -> Result<StatementPair, CnliError> {
    let prompt = counterfactual_prompt(factual_text);
    let req = LlmRequest::new(model_id, prompt.clone());
    let rec = gateway.complete(&req)?;
    let proposal = rec.raw_text.trim();
    if proposal.is_empty() || normalize(proposal) == normalize(factual_text) {
        return Err(CnliError::DegenerateFlip(pair_id.to_string()));
    }
    Ok(StatementPair {
        pair_id: pair_id.to_string(),
        chain_id: chain_id.to_string(),
        factual_text: factual_text.to_string(),
        counterfactual_text: proposal.to_string(),
        verified: false,
        proposal_prompt: prompt,
        proposal_digest: Some(rec.request_digest),
    })
}

/// Proposes flips for every statement and conclusion. Failures are
/// returned alongside the pairs, keyed by pair id.
pub fn propose_for_chains(
    chains: &[ReasoningChain],
    gateway: &Gateway,
    model_id: &str,
) -> (Vec<StatementPair>, Vec<(String, CnliError)>) {
    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for c in chains {
        let items = c
            .statements
            .iter()
            .enumerate()
            .map(|(i, s)| (c.statement_pair_id(i), s))
            .chain([(c.conclusion_pair_id(), &c.conclusion)]);
        for (id, text) in items {
            match propose_counterfactual(&id, &c.chain_id, text, gateway, model_id) {
                Ok(p) => pairs.push(p),
                Err(e) => failures.push((id, e)),
            }
        }
    }
    (pairs, failures)
}
