use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TokenUsage;

pub const DEFAULT_MAX_TOKENS: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Message { role: "user".into(), content: content.into() }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Message { role: "system".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub model_id: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
}

impl LlmRequest {
    /// Single user-turn request with sampling at temperature 1 and top-p 1.
    pub fn new(model_id: impl Into<String>, prompt: impl Into<String>) -> Self {
        LlmRequest {
            model_id: model_id.into(),
            messages: vec![Message::user(prompt)],
            temperature: 1.0,
            top_p: 1.0,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }

    /// Hex SHA-256 of the canonical JSON form (object keys sorted).
    pub fn digest(&self) -> String {
        // serde_json::Value keeps object keys in a BTreeMap, so the
        // serialization below is independent of struct field order.
        let canonical = serde_json::to_value(self).expect("request serializes");
        let bytes = serde_json::to_vec(&canonical).expect("value serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedResponse {
    pub request_digest: String,
    pub model_id: String,
    pub raw_text: String,
    pub finish_reason: Option<String>,
    pub latency_ms: u64,
    pub token_usage: TokenUsage,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub attempt_count: u32,
}
