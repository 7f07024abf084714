//! Synthetic natural-language satisfiability theories: generation with
//! controlled size and depth, closed-world forward chaining with stratified
//! negation as the labelling oracle, proof verification, verbalization and
//! few-shot prompt assembly.

mod fewshot;
mod generate;
mod label;
mod reasoner;
pub mod ruletaker;
mod types;
mod verbalize;
mod verify;

pub use fewshot::{assemble_fewshot_prompt, relational_factors, FEWSHOT_INSTRUCTION};
pub use generate::{generate_batch, generate_theory, GenerationConfig};
pub use label::{label_question, QuestionLabel};
pub use reasoner::{forward_chain, forward_chain_naive, Closure, Derivation};
pub use types::{
    Atom, ConfigEcho, GroundLiteral, Literal, ProofStep, ProofTrace, Rule, Term, Theory, TheoryInstance, Vocabulary,
    ENTITY_NAMES, PREDICATE_NAMES,
};
pub use verbalize::{parse_question, parse_theory, verbalize, verbalize_question};
pub use verify::{transcribe_chain, verify_reasoning_chain, InvalidReason, ProcessVerdict};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NlsatError {
    #[error("unknown symbol: {0}")]
    VocabularyError(String),
    #[error("malformed theory: {0}")]
    Malformed(String),
    #[error("rules recurse through negation on predicate `{0}`")]
    Unstratifiable(String),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("no instance satisfying the constraints after {0} attempts")]
    GenerationExhausted(usize),
    #[error("{requested} exemplars requested but the pool holds {available}")]
    InsufficientExemplars { requested: usize, available: usize },
    #[error("target instance `{0}` is part of the exemplar pool")]
    TargetInPool(String),
    #[error("cannot parse `{sentence}`: {reason}")]
    Parse { sentence: String, reason: String },
}
