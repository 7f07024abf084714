use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CnliError, StatementPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVerdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationVerdict {
    pub pair_id: String,
    pub verdict: PairVerdict,
    #[serde(default)]
    pub annotator_id: String,
}

/// Applies human verdicts: accepted pairs become verified, rejected pairs
/// are dropped, pairs without a verdict are kept unverified.
pub fn ingest_verification(
    pairs: Vec<StatementPair>,
    verdicts: &[VerificationVerdict],
) -> Result<Vec<StatementPair>, CnliError> {
    let mut by_id: BTreeMap<&str, PairVerdict> = BTreeMap::new();
    for v in verdicts {
        if !pairs.iter().any(|p| p.pair_id == v.pair_id) {
            return Err(CnliError::UnknownPair(v.pair_id.clone()));
        }
        match by_id.insert(&v.pair_id, v.verdict) {
            Some(prev) if prev != v.verdict => return Err(CnliError::ConflictingVerdicts(v.pair_id.clone())),
            _ => {}
        }
    }
    let mut out = Vec::with_capacity(pairs.len());
    for mut p in pairs {
        match by_id.get(p.pair_id.as_str()) {
            Some(PairVerdict::Accept) => {
                p.verified = true;
                out.push(p);
            }
            Some(PairVerdict::Reject) => log::info!("pair `{}` rejected by annotator, excluded", p.pair_id),
            None => out.push(p),
        }
    }
    Ok(out)
}
