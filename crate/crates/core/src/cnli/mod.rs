//! Counterfactual natural-language-inference instances and the
//! likelihood-decrease conflict factor.

mod build;
mod propose;
mod scorer;
mod verify;

use serde::{Deserialize, Serialize};

pub use build::{build_cnli_prompt, build_instances, LengthWindow, BuildReport, CNLI_TEMPLATES};
pub use propose::{counterfactual_prompt, propose_counterfactual, propose_for_chains};
pub use scorer::{likelihood_diff, pair_diff, text_digest, FileScores, HttpScorer, PllScorer, ScoreRecord, ScorerHealth, TokenBreakdown, TokenTerm};
pub use verify::{ingest_verification, PairVerdict, VerificationVerdict};

use crate::jsonl::JsonlError;
use crate::llm_gateway::GatewayError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasoningChain {
    pub chain_id: String,
    pub statements: Vec<String>,
    pub conclusion: String,
}

impl ReasoningChain {
    pub fn validate(&self) -> Result<(), String> {
        if self.chain_id.trim().is_empty() {
            return Err("empty chain_id".into());
        }
        if self.statements.is_empty() {
            return Err(format!("chain `{}` has no statements", self.chain_id));
        }
        if self.statements.iter().chain([&self.conclusion]).any(|s| s.trim().is_empty()) {
            return Err(format!("chain `{}` has an empty statement", self.chain_id));
        }
        Ok(())
    }

    pub fn statement_pair_id(&self, i: usize) -> String {
        format!("{}:s{i}", self.chain_id)
    }

    pub fn conclusion_pair_id(&self) -> String {
        format!("{}:c", self.chain_id)
    }
}

/// Reads and validates `chains.jsonl`; chain ids must be unique.
pub fn read_chains(path: &std::path::Path) -> Result<Vec<ReasoningChain>, CnliError> {
    let chains: Vec<ReasoningChain> = crate::jsonl::read(path)?;
    let mut seen = std::collections::HashSet::new();
    for (i, c) in chains.iter().enumerate() {
        c.validate().map_err(|reason| CnliError::InvalidChain { index: i, reason })?;
        if !seen.insert(&c.chain_id) {
            return Err(CnliError::InvalidChain { index: i, reason: format!("duplicate chain_id `{}`", c.chain_id) });
        }
    }
    Ok(chains)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementPair {
    pub pair_id: String,
    pub chain_id: String,
    pub factual_text: String,
    pub counterfactual_text: String,
    pub verified: bool,
    /// Prompt sent to the proposing model.
    #[serde(default)]
    pub proposal_prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal_digest: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NliLabel {
    Entailment,
    Contradiction,
}

impl NliLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            NliLabel::Entailment => "entailment",
            NliLabel::Contradiction => "contradiction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnliInstance {
    pub id: String,
    pub premises: Vec<StatementPair>,
    pub hypothesis: String,
    pub gold_label: NliLabel,
    /// Summed PLL of factual premises minus that of the prompted premises,
    /// in nats. Zero for baseline instances.
    pub likelihood_diff: f64,
    pub source_chain_id: String,
    /// Baseline instances prompt with the factual premises.
    pub is_baseline: bool,
    /// Total tokens over the prompted premises.
    pub premise_len: usize,
}

impl CnliInstance {
    pub fn prompted_premises(&self) -> Vec<&str> {
        self.premises
            .iter()
            .map(|p| if self.is_baseline { p.factual_text.as_str() } else { p.counterfactual_text.as_str() })
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CnliError {
    #[error("chain record {index}: {reason}")]
    InvalidChain { index: usize, reason: String },
    #[error("proposal for `{0}` does not change the statement")]
    DegenerateFlip(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("verdict references unknown pair `{0}`")]
    UnknownPair(String),
    #[error("conflicting verdicts for pair `{0}`")]
    ConflictingVerdicts(String),
    #[error("scorer unavailable: {0}")]
    ScorerUnavailable(String),
    #[error("text {index} exceeds the scorer's context")]
    TextTooLong { index: usize },
    #[error("scorer protocol error: {0}")]
    ScorerProtocol(String),
    #[error("non-finite likelihood difference")]
    NonFinite,
    #[error("instance `{0}` has unverified premises")]
    UnverifiedInstance(String),
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
