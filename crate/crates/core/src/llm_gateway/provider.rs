use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::LlmRequest;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderReply {
    pub text: String,
    pub finish_reason: Option<String>,
    pub usage: TokenUsage,
}

impl ProviderReply {
    pub fn text(text: impl Into<String>) -> Self {
        ProviderReply { text: text.into(), finish_reason: Some("stop".into()), usage: TokenUsage::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("transient: {0}")]
    Transient(String),
    #[error("auth: {0}")]
    Auth(String),
    #[error("{0}")]
    Fatal(String),
}

pub trait Provider: Send + Sync {
    fn complete(&self, request: &LlmRequest) -> Result<ProviderReply, ProviderError>;
}

impl<P: Provider + ?Sized> Provider for std::sync::Arc<P> {
    fn complete(&self, request: &LlmRequest) -> Result<ProviderReply, ProviderError> {
        (**self).complete(request)
    }
}

type Responder = Box<dyn Fn(&LlmRequest) -> Result<ProviderReply, ProviderError> + Send + Sync>;

/// In-process provider for tests and offline runs. Counts every call.
pub struct MockProvider {
    respond: Responder,
    calls: AtomicUsize,
}

impl MockProvider {
    pub fn new(f: impl Fn(&LlmRequest) -> Result<ProviderReply, ProviderError> + Send + Sync + 'static) -> Self {
        MockProvider { respond: Box::new(f), calls: AtomicUsize::new(0) }
    }

    pub fn fixed(text: impl Into<String>) -> Self {
        let text = text.into();
        Self::new(move |_| Ok(ProviderReply::text(text.clone())))
    }

    pub fn echo() -> Self {
        Self::new(|r| Ok(ProviderReply::text(r.messages.last().map(|m| m.content.clone()).unwrap_or_default())))
    }

    /// Reply that is a pure function of the request digest and ends with a
    /// True/False verdict, so relational runs have something to extract.
    pub fn deterministic() -> Self {
        Self::new(|r| {
            let d = r.digest();
            let verdict = if u8::from_str_radix(&d[..2], 16).unwrap_or(0) % 2 == 0 { "True" } else { "False" };
            Ok(ProviderReply::text(format!("Response {}. Answer: {verdict}", &d[..12])))
        })
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Provider for MockProvider {
    fn complete(&self, request: &LlmRequest) -> Result<ProviderReply, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        (self.respond)(request)
    }
}

/// Chat-completions over HTTP with bearer authentication.
pub struct HttpChatProvider {
    client: reqwest::blocking::Client,
    base: String,
    api_key: String,
}

impl HttpChatProvider {
    pub fn new(base: impl Into<String>, api_key: impl Into<String>, timeout: Duration) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ProviderError::Fatal(e.to_string()))?;
        Ok(HttpChatProvider { client, base: base.into().trim_end_matches('/').to_string(), api_key: api_key.into() })
    }

    /// Reads `LLM_API_KEY` and `LLM_API_BASE`.
    pub fn from_env() -> Result<Self, ProviderError> {
        let key = std::env::var("LLM_API_KEY").map_err(|_| ProviderError::Auth("LLM_API_KEY is not set".into()))?;
        let base = std::env::var("LLM_API_BASE").map_err(|_| ProviderError::Fatal("LLM_API_BASE is not set".into()))?;
        Self::new(base, key, Duration::from_secs(120))
    }
}

impl Provider for HttpChatProvider {
    fn complete(&self, request: &LlmRequest) -> Result<ProviderReply, ProviderError> {
        let body = json!({
            "model": request.model_id,
            "messages": request.messages,
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_tokens,
        });
        let resp = self
            .client
            .post(format!("{}/chat/completions", self.base))
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| ProviderError::Transient(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(ProviderError::Auth(format!("HTTP {status}")));
        }
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(ProviderError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(ProviderError::Fatal(format!("HTTP {status}: {}", resp.text().unwrap_or_default())));
        }
        let v: Value = resp.json().map_err(|e| ProviderError::Fatal(format!("bad response body: {e}")))?;
        parse_chat_reply(&v)
    }
}

fn parse_chat_reply(v: &Value) -> Result<ProviderReply, ProviderError> {
    let choice = v.pointer("/choices/0").ok_or_else(|| ProviderError::Fatal("response has no choices".into()))?;
    let text = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| ProviderError::Fatal("choice has no message content".into()))?;
    let usage = TokenUsage {
        prompt_tokens: v.pointer("/usage/prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
        completion_tokens: v.pointer("/usage/completion_tokens").and_then(Value::as_u64).unwrap_or(0),
    };
    Ok(ProviderReply {
        text: text.to_string(),
        finish_reason: choice.get("finish_reason").and_then(Value::as_str).map(str::to_string),
        usage,
    })
}
