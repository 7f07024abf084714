use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{CnliError, StatementPair};
use crate::jsonl;

/// Pseudo-log-likelihood of each text, aligned with the input.
pub trait PllScorer: Send + Sync {
    fn score(&self, texts: &[String]) -> Result<Vec<f64>, CnliError>;
}

pub fn text_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub text_digest: String,
    pub pll: f64,
    pub model_tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorerHealth {
    pub status: String,
    pub model_tag: String,
    pub tokenizer_version: String,
}

/// One masked position in a scored text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenTerm {
    pub token: String,
    pub logprob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenBreakdown {
    pub tokens: Vec<TokenTerm>,
    pub pll: f64,
}

/// Client for the scoring service (`POST /score`, `GET /health`).
pub struct HttpScorer {
    client: reqwest::blocking::Client,
    base: String,
    model_tag: String,
    batch_limit: usize,
    max_in_flight: usize,
}

impl HttpScorer {
    pub fn new(base: impl Into<String>, model_tag: impl Into<String>) -> Result<Self, CnliError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| CnliError::ScorerUnavailable(e.to_string()))?;
        Ok(HttpScorer {
            client,
            base: base.into().trim_end_matches('/').to_string(),
            model_tag: model_tag.into(),
            batch_limit: 64,
            max_in_flight: 4,
        })
    }

    pub fn with_limits(mut self, batch_limit: usize, max_in_flight: usize) -> Self {
        self.batch_limit = batch_limit.max(1);
        self.max_in_flight = max_in_flight.max(1);
        self
    }

    pub fn health(&self) -> Result<ScorerHealth, CnliError> {
        let resp = self
            .client
            .get(format!("{}/health", self.base))
            .send()
            .map_err(|e| CnliError::ScorerUnavailable(e.to_string()))?;
        resp.json().map_err(|e| CnliError::ScorerProtocol(e.to_string()))
    }

    /// Fails unless the service is ready and serves this client's model tag.
    pub fn ensure_ready(&self) -> Result<ScorerHealth, CnliError> {
        let h = self.health()?;
        if h.status != "ready" {
            return Err(CnliError::ScorerUnavailable(format!("scorer status `{}`", h.status)));
        }
        if h.model_tag != self.model_tag {
            return Err(CnliError::ScorerProtocol(format!("scorer serves `{}`, expected `{}`", h.model_tag, self.model_tag)));
        }
        Ok(h)
    }

    /// Per-position terms whose sum is the text's score.
    pub fn debug_tokens(&self, text: &str) -> Result<TokenBreakdown, CnliError> {
        let resp = self
            .client
            .get(format!("{}/debug/tokens", self.base))
            .query(&[("text", text)])
            .send()
            .map_err(|e| CnliError::ScorerUnavailable(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(CnliError::ScorerUnavailable(format!("HTTP {}", resp.status())));
        }
        resp.json().map_err(|e| CnliError::ScorerProtocol(e.to_string()))
    }

    fn score_batch(&self, texts: &[String], offset: usize) -> Result<Vec<f64>, CnliError> {
        let resp = self
            .client
            .post(format!("{}/score", self.base))
            .json(&json!({"texts": texts, "model_tag": self.model_tag}))
            .send()
            .map_err(|e| CnliError::ScorerUnavailable(e.to_string()))?;
        let status = resp.status();
        let body: Value = resp.json().map_err(|e| CnliError::ScorerProtocol(format!("HTTP {status}: {e}")))?;
        if !status.is_success() {
            if let Some(i) = body.get("index").and_then(Value::as_u64) {
                return Err(CnliError::TextTooLong { index: offset + i as usize });
            }
            return Err(CnliError::ScorerUnavailable(format!("HTTP {status}: {body}")));
        }
        if body.get("model_tag").and_then(Value::as_str) != Some(self.model_tag.as_str()) {
            return Err(CnliError::ScorerProtocol(format!("model_tag mismatch, expected `{}`", self.model_tag)));
        }
        let pll: Vec<f64> = body
            .get("pll")
            .and_then(Value::as_array)
            .ok_or_else(|| CnliError::ScorerProtocol("response has no pll list".into()))?
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| CnliError::ScorerProtocol("pll entry is not a number".into())))
            .collect::<Result<_, _>>()?;
        if pll.len() != texts.len() {
            return Err(CnliError::ScorerProtocol(format!("{} scores for {} texts", pll.len(), texts.len())));
        }
        Ok(pll)
    }
}

impl PllScorer for HttpScorer {
    fn score(&self, texts: &[String]) -> Result<Vec<f64>, CnliError> {
        let batches: Vec<(usize, &[String])> =
            texts.chunks(self.batch_limit).enumerate().map(|(i, c)| (i * self.batch_limit, c)).collect();
        let mut out = Vec::with_capacity(texts.len());
        for wave in batches.chunks(self.max_in_flight) {
            let results: Vec<Result<Vec<f64>, CnliError>> = std::thread::scope(|s| {
                let handles: Vec<_> = wave.iter().map(|&(off, b)| s.spawn(move || self.score_batch(b, off))).collect();
                handles.into_iter().map(|h| h.join().expect("scorer thread panicked")).collect()
            });
            for r in results {
                out.extend(r?);
            }
        }
        Ok(out)
    }
}

/// Precomputed scores from `scores.jsonl`, optionally backed by a live
/// scorer for texts not in the file.
pub struct FileScores {
    model_tag: String,
    by_digest: HashMap<String, f64>,
    fallback: Option<Box<dyn PllScorer>>,
}

impl FileScores {
    pub fn new(model_tag: impl Into<String>, records: Vec<ScoreRecord>) -> Self {
        let model_tag = model_tag.into();
        let by_digest = records.into_iter().filter(|r| r.model_tag == model_tag).map(|r| (r.text_digest, r.pll)).collect();
        FileScores { model_tag, by_digest, fallback: None }
    }

    pub fn load(path: &Path, model_tag: impl Into<String>) -> Result<Self, CnliError> {
        Ok(Self::new(model_tag, jsonl::read(path)?))
    }

    pub fn with_fallback(mut self, scorer: Box<dyn PllScorer>) -> Self {
        self.fallback = Some(scorer);
        self
    }

    pub fn model_tag(&self) -> &str {
        &self.model_tag
    }

    pub fn len(&self) -> usize {
        self.by_digest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_digest.is_empty()
    }
}

impl PllScorer for FileScores {
    fn score(&self, texts: &[String]) -> Result<Vec<f64>, CnliError> {
        let found: Vec<Option<f64>> = texts.iter().map(|t| self.by_digest.get(&text_digest(t)).copied()).collect();
        let missing: Vec<usize> = (0..texts.len()).filter(|&i| found[i].is_none()).collect();
        if missing.is_empty() {
            return Ok(found.into_iter().flatten().collect());
        }
        let Some(fallback) = &self.fallback else {
            return Err(CnliError::ScorerUnavailable(format!("{} text(s) have no cached score", missing.len())));
        };
        let fetched = fallback.score(&missing.iter().map(|&i| texts[i].clone()).collect::<Vec<_>>())?;
        let mut out = found;
        for (i, v) in missing.into_iter().zip(fetched) {
            out[i] = Some(v);
        }
        Ok(out.into_iter().map(|v| v.expect("filled")).collect())
    }
}

/// PLL(factual) − PLL(counterfactual) for one pair of texts.
pub fn pair_diff(factual: &str, counterfactual: &str, scorer: &dyn PllScorer) -> Result<f64, CnliError> {
    let s = scorer.score(&[factual.to_string(), counterfactual.to_string()])?;
    finite(s[0] - s[1])
}

/// Sum of factual PLLs minus sum of counterfactual PLLs, each statement
/// scored on its own.
pub fn likelihood_diff(premises: &[StatementPair], scorer: &dyn PllScorer) -> Result<f64, CnliError> {
    let texts: Vec<String> = premises
        .iter()
        .map(|p| p.factual_text.clone())
        .chain(premises.iter().map(|p| p.counterfactual_text.clone()))
        .collect();
    let s = scorer.score(&texts)?;
    let (f, c) = s.split_at(premises.len());
    finite(f.iter().sum::<f64>() - c.iter().sum::<f64>())
}

fn finite(x: f64) -> Result<f64, CnliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CnliError::NonFinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(pairs: &[(&str, f64)]) -> FileScores {
        FileScores::new(
            "rl",
            pairs.iter().map(|(t, p)| ScoreRecord { text_digest: text_digest(t), pll: *p, model_tag: "rl".into() }).collect(),
        )
    }

    #[test]
    fn sign_convention() {
        let s = scores(&[("a", -10.0), ("b", -14.5)]);
        assert_eq!(pair_diff("a", "b", &s).unwrap(), 4.5);
        assert_eq!(pair_diff("b", "a", &s).unwrap(), -4.5);
        assert_eq!(pair_diff("a", "a", &s).unwrap(), 0.0);
    }

    #[test]
    fn missing_without_fallback() {
        let s = scores(&[("a", -1.0)]);
        assert!(matches!(pair_diff("a", "zzz", &s), Err(CnliError::ScorerUnavailable(_))));
    }

    #[test]
    fn other_model_tags_ignored() {
        let recs = vec![ScoreRecord { text_digest: text_digest("a"), pll: -1.0, model_tag: "other".into() }];
        assert!(FileScores::new("rl", recs).is_empty());
    }

    #[test]
    fn fallback_fills_gaps() {
        struct Len;
        impl PllScorer for Len {
            fn score(&self, texts: &[String]) -> Result<Vec<f64>, CnliError> {
                Ok(texts.iter().map(|t| -(t.len() as f64)).collect())
            }
        }
        let s = scores(&[("a", -100.0)]).with_fallback(Box::new(Len));
        assert_eq!(s.score(&["abc".into(), "a".into()]).unwrap(), [-3.0, -100.0]);
    }
}
