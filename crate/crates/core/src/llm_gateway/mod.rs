//! Provider-agnostic LLM querying with digest-keyed caching, retry with
//! backoff, rate limiting and an append-only response log.

mod gateway;
mod provider;
mod ratelimit;
mod request;

pub use gateway::{latest_entries, read_response_log, BatchEntry, Gateway, GatewayOptions};
pub use provider::{HttpChatProvider, MockProvider, Provider, ProviderError, ProviderReply, TokenUsage};
pub use ratelimit::RateLimiter;
pub use request::{LlmRequest, Message, RecordedResponse, DEFAULT_MAX_TOKENS};

use crate::jsonl::JsonlError;

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("gave up after {attempts} attempts: {last}")]
    TransientExhausted { attempts: u32, last: String },
    #[error("authentication failed: {0}")]
    AuthError(String),
    #[error("provider error: {0}")]
    Provider(String),
    #[error("parallelism must be at least 1")]
    InvalidParallelism,
    #[error("cache entry {path}: {source}")]
    Cache { path: String, source: serde_json::Error },
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
