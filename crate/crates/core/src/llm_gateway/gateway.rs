use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{GatewayError, LlmRequest, Provider, ProviderError, RateLimiter, RecordedResponse};
use crate::jsonl;
use crate::probe::ProbeInstance;

#[derive(Debug, Clone)]
pub struct GatewayOptions {
    /// Ignore cached records and always call the provider.
    pub fresh: bool,
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub max_tokens: u32,
}

impl Default for GatewayOptions {
    fn default() -> Self {
        GatewayOptions { fresh: false, max_attempts: 5, initial_backoff: Duration::from_millis(500), max_tokens: super::DEFAULT_MAX_TOKENS }
    }
}

/// One line of `responses.jsonl`. Exactly one of `response` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub instance_id: String,
    pub model_id: String,
    pub request_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<RecordedResponse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub struct Gateway {
    provider: Box<dyn Provider>,
    cache_dir: PathBuf,
    options: GatewayOptions,
    limiter: Option<RateLimiter>,
    write_lock: Mutex<()>,
    provider_calls: AtomicUsize,
}

impl Gateway {
    pub fn new(provider: Box<dyn Provider>, cache_dir: impl Into<PathBuf>, options: GatewayOptions) -> Self {
        Gateway {
            provider,
            cache_dir: cache_dir.into(),
            options,
            limiter: None,
            write_lock: Mutex::new(()),
            provider_calls: AtomicUsize::new(0),
        }
    }

    pub fn with_rate_limit(mut self, limiter: RateLimiter) -> Self {
        self.limiter = Some(limiter);
        self
    }

    /// Provider invocations made through this gateway, retries included.
    pub fn provider_calls(&self) -> usize {
        self.provider_calls.load(Ordering::SeqCst)
    }

    fn cache_path(&self, digest: &str) -> PathBuf {
        self.cache_dir.join(format!("{digest}.json"))
    }

    fn cached(&self, digest: &str) -> Result<Option<RecordedResponse>, GatewayError> {
        let path = self.cache_path(digest);
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|source| GatewayError::Cache { path: path.display().to_string(), source }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn persist(&self, record: &RecordedResponse) -> Result<(), GatewayError> {
        let _guard = self.write_lock.lock().unwrap();
        fs::create_dir_all(&self.cache_dir)?;
        let path = self.cache_path(&record.request_digest);
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(record).expect("record serializes"))?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn complete(&self, request: &LlmRequest) -> Result<RecordedResponse, GatewayError> {
        let digest = request.digest();
        if !self.options.fresh {
            if let Some(hit) = self.cached(&digest)? {
                return Ok(hit);
            }
        }
        let mut backoff = self.options.initial_backoff;
        let mut last = String::new();
        for attempt in 1..=self.options.max_attempts {
            if let Some(l) = &self.limiter {
                l.acquire();
            }
            self.provider_calls.fetch_add(1, Ordering::SeqCst);
            let start = Instant::now();
            match self.provider.complete(request) {
                Ok(reply) => {
                    let record = RecordedResponse {
                        request_digest: digest,
                        model_id: request.model_id.clone(),
                        raw_text: reply.text,
                        finish_reason: reply.finish_reason,
                        latency_ms: start.elapsed().as_millis() as u64,
                        token_usage: reply.usage,
                        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64),
                        attempt_count: attempt,
                    };
                    self.persist(&record)?;
                    return Ok(record);
                }
                Err(ProviderError::Auth(m)) => return Err(GatewayError::AuthError(m)),
                Err(ProviderError::Fatal(m)) => return Err(GatewayError::Provider(m)),
                Err(ProviderError::Transient(m)) => {
                    log::warn!("attempt {attempt} for {} failed: {m}", &digest[..12]);
                    last = m;
                    if attempt < self.options.max_attempts {
                        std::thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
            }
        }
        Err(GatewayError::TransientExhausted { attempts: self.options.max_attempts, last })
    }

    pub fn request_for(&self, instance: &ProbeInstance, model_id: &str) -> LlmRequest {
        let mut r = LlmRequest::new(model_id, instance.prompt.clone());
        r.max_tokens = self.options.max_tokens;
        r
    }

    /// Queries every instance once and appends the outcomes to `log_path`.
    ///
    /// Instances that already have a successful entry for the same request
    /// in the log are not re-queried. New entries are appended in input
    /// order regardless of completion order. Returns one entry per instance.
    pub fn batch_run(
        &self,
        instances: &[ProbeInstance],
        model_id: &str,
        parallelism: usize,
        log_path: &Path,
    ) -> Result<Vec<BatchEntry>, GatewayError> {
        if parallelism == 0 {
            return Err(GatewayError::InvalidParallelism);
        }
        let existing = if log_path.exists() { jsonl::read::<BatchEntry>(log_path)? } else { Vec::new() };
        let mut done: BTreeMap<(String, String), BatchEntry> = BTreeMap::new();
        for e in existing.into_iter().filter(|e| e.response.is_some()) {
            done.insert((e.instance_id.clone(), e.request_digest.clone()), e);
        }

        let requests: Vec<LlmRequest> = instances.iter().map(|i| self.request_for(i, model_id)).collect();
        let todo: Vec<usize> = (0..instances.len())
            .filter(|&i| self.options.fresh || !done.contains_key(&(instances[i].id.clone(), requests[i].digest())))
            .collect();

        let slots: Vec<Mutex<Option<BatchEntry>>> = todo.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..parallelism.min(todo.len().max(1)) {
                s.spawn(|| loop {
                    let k = next.fetch_add(1, Ordering::SeqCst);
                    let Some(&i) = todo.get(k) else { break };
                    let req = &requests[i];
                    let (response, error) = match self.complete(req) {
                        Ok(r) => (Some(r), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    *slots[k].lock().unwrap() = Some(BatchEntry {
                        instance_id: instances[i].id.clone(),
                        model_id: model_id.to_string(),
                        request_digest: req.digest(),
                        response,
                        error,
                    });
                });
            }
        });
        let fresh_entries: Vec<BatchEntry> =
            slots.into_iter().map(|m| m.into_inner().unwrap().expect("every slot is filled")).collect();
        jsonl::append(log_path, &fresh_entries)?;

        let mut by_index: Vec<Option<BatchEntry>> = vec![None; instances.len()];
        for (k, e) in todo.iter().zip(fresh_entries) {
            by_index[*k] = Some(e);
        }
        Ok(by_index
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                e.unwrap_or_else(|| done[&(instances[i].id.clone(), requests[i].digest())].clone())
            })
            .collect())
    }
}

pub fn read_response_log(path: &Path) -> Result<Vec<BatchEntry>, GatewayError> {
    Ok(jsonl::read(path)?)
}

/// Latest entry per (instance, model), preferring successes over errors.
pub fn latest_entries(log: &[BatchEntry]) -> Vec<BatchEntry> {
    let mut out: BTreeMap<(String, String), &BatchEntry> = BTreeMap::new();
    for e in log {
        let key = (e.instance_id.clone(), e.model_id.clone());
        match out.get(&key) {
            Some(prev) if prev.response.is_some() && e.response.is_none() => {}
            _ => {
                out.insert(key, e);
            }
        }
    }
    out.into_values().cloned().collect()
}
