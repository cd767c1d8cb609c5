//! Chat-completion providers: an offline fixture-backed mock and a live
//! OpenAI-compatible HTTP client with bounded retries.

use super::{ChatMessage, ContentPart, GenRequest, GenResponse};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Condvar, Mutex};
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProviderError {
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("mock fixture missing for message hash {hash}: create {path}")]
    FixtureMissing { hash: String, path: PathBuf },
    #[error("fixture {path} has {have} completion section(s), request needs {need}")]
    FixtureTooSmall {
        path: PathBuf,
        have: usize,
        need: usize,
    },
    #[error("provider transport failed after {attempts} attempt(s): {message}")]
    Transport { message: String, attempts: u32 },
    #[error("provider protocol error: {0}")]
    Protocol(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

pub trait Provider: Send + Sync {
    fn generate(&self, request: &GenRequest) -> Result<GenResponse, ProviderError>;
    fn supports_images(&self) -> bool;
    fn name(&self) -> &'static str;
}

// ── mock provider ───────────────────────────────────────────────

/// Offline provider returning fixture completions keyed by a stable hash
/// of the message list.
///
/// Fixtures are files named `<hash>.txt` in the fixture directory. A file
/// holds one or more completions separated by lines containing exactly
/// `%%%`; a request for `n` samples takes the first `n` sections. The hash
/// covers roles and content only (not temperature or n), so one fixture
/// serves both sampling regimes.
pub struct MockProvider {
    dir: PathBuf,
}

impl MockProvider {
    pub fn new(dir: impl Into<PathBuf>) -> MockProvider {
        MockProvider { dir: dir.into() }
    }

    pub fn fixture_path(&self, request: &GenRequest) -> PathBuf {
        self.dir
            .join(format!("{}.txt", message_hash(&request.messages)))
    }
}

/// Stable content hash of a message list: 32 hex chars of SHA-256 over a
/// canonical serialization. Image payloads contribute their own digests.
pub fn message_hash(messages: &[ChatMessage]) -> String {
    let mut hasher = Sha256::new();
    for message in messages {
        hasher.update(message.role.name().as_bytes());
        hasher.update(b"\n");
        for part in &message.content {
            match part {
                ContentPart::Text { text } => {
                    hasher.update(b"text:");
                    hasher.update((text.len() as u64).to_le_bytes());
                    hasher.update(text.as_bytes());
                }
                ContentPart::Image { media_type, base64 } => {
                    let mut inner = Sha256::new();
                    inner.update(base64.as_bytes());
                    hasher.update(b"image:");
                    hasher.update(media_type.as_bytes());
                    hasher.update(b":");
                    hasher.update(inner.finalize());
                }
            }
            hasher.update(b"\x1f");
        }
        hasher.update(b"\x1e");
    }
    let digest = hasher.finalize();
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}

impl Provider for MockProvider {
    fn generate(&self, request: &GenRequest) -> Result<GenResponse, ProviderError> {
        request
            .validate()
            .map_err(|e| ProviderError::InvalidRequest(e.to_string()))?;
        let hash = message_hash(&request.messages);
        let path = self.dir.join(format!("{hash}.txt"));
        let text = std::fs::read_to_string(&path).map_err(|_| ProviderError::FixtureMissing {
            hash,
            path: path.clone(),
        })?;
        let sections: Vec<String> = split_fixture_sections(&text);
        let need = request.n as usize;
        if sections.len() < need {
            return Err(ProviderError::FixtureTooSmall {
                path,
                have: sections.len(),
                need,
            });
        }
        let mut meta = BTreeMap::new();
        meta.insert("provider".to_string(), "mock".to_string());
        meta.insert("model".to_string(), request.model.clone());
        Ok(GenResponse {
            completions: sections.into_iter().take(need).collect(),
            meta,
        })
    }

    fn supports_images(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "mock"
    }
}

fn split_fixture_sections(text: &str) -> Vec<String> {
    let mut sections = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line == "%%%" {
            sections.push(std::mem::take(&mut current));
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    sections.push(current);
    sections
        .into_iter()
        .map(|s| s.trim_end().to_string())
        .collect()
}

// ── live provider ───────────────────────────────────────────────

/// One HTTP round trip, injectable for tests.
pub trait ChatTransport: Send + Sync {
    fn send(
        &self,
        endpoint: &str,
        api_key: &str,
        body: &serde_json::Value,
    ) -> Result<TransportReply, String>;
}

#[derive(Debug, Clone)]
pub struct TransportReply {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone)]
pub struct HttpProviderConfig {
    /// Base URL, e.g. `https://api.openai.com/v1`.
    pub endpoint: String,
    pub api_key: String,
    pub supports_images: bool,
    /// Maximum in-flight requests across all threads.
    pub max_concurrent: usize,
    /// Retries after the initial attempt, on transient failures only.
    pub max_retries: u32,
    /// Base backoff, doubled per retry.
    pub backoff: Duration,
}

impl HttpProviderConfig {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> HttpProviderConfig {
        HttpProviderConfig {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            supports_images: true,
            max_concurrent: 4,
            max_retries: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

/// Counting semaphore; the provider may be shared across worker threads.
struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Semaphore {
        Semaphore {
            permits: Mutex::new(permits.max(1)),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
    }

    fn release(&self) {
        *self.permits.lock().unwrap() += 1;
        self.available.notify_one();
    }
}

pub struct HttpProvider<T: ChatTransport = ReqwestTransport> {
    config: HttpProviderConfig,
    transport: T,
    semaphore: Semaphore,
}

impl HttpProvider<ReqwestTransport> {
    pub fn new(config: HttpProviderConfig) -> HttpProvider<ReqwestTransport> {
        HttpProvider::with_transport(config, ReqwestTransport::new())
    }
}

impl<T: ChatTransport> HttpProvider<T> {
    pub fn with_transport(config: HttpProviderConfig, transport: T) -> HttpProvider<T> {
        let permits = config.max_concurrent;
        HttpProvider {
            config,
            transport,
            semaphore: Semaphore::new(permits),
        }
    }

    fn request_body(&self, request: &GenRequest) -> serde_json::Value {
        let messages: Vec<serde_json::Value> = request
            .messages
            .iter()
            .map(|m| {
                let content: Vec<serde_json::Value> = m
                    .content
                    .iter()
                    .map(|part| match part {
                        ContentPart::Text { text } => serde_json::json!({
                            "type": "text",
                            "text": text,
                        }),
                        ContentPart::Image { media_type, base64 } => serde_json::json!({
                            "type": "image_url",
                            "image_url": {
                                "url": format!("data:{media_type};base64,{base64}"),
                            },
                        }),
                    })
                    .collect();
                serde_json::json!({ "role": m.role.name(), "content": content })
            })
            .collect();
        serde_json::json!({
            "model": request.model,
            "temperature": request.temperature,
            "n": request.n,
            "messages": messages,
        })
    }

    fn parse_reply(&self, body: &str, model: &str) -> Result<GenResponse, ProviderError> {
        let value: serde_json::Value = serde_json::from_str(body)
            .map_err(|e| ProviderError::Protocol(format!("response is not JSON: {e}")))?;
        let choices = value
            .get("choices")
            .and_then(|c| c.as_array())
            .ok_or_else(|| ProviderError::Protocol("response has no choices array".into()))?;
        let mut completions = Vec::with_capacity(choices.len());
        for choice in choices {
            let text = choice
                .get("message")
                .and_then(|m| m.get("content"))
                .and_then(|c| c.as_str())
                .ok_or_else(|| {
                    ProviderError::Protocol("choice has no message.content string".into())
                })?;
            completions.push(text.to_string());
        }
        if completions.is_empty() {
            return Err(ProviderError::Protocol("response has zero choices".into()));
        }
        let mut meta = BTreeMap::new();
        meta.insert("provider".to_string(), "http".to_string());
        meta.insert("model".to_string(), model.to_string());
        Ok(GenResponse { completions, meta })
    }
}

impl<T: ChatTransport> Provider for HttpProvider<T> {
    fn generate(&self, request: &GenRequest) -> Result<GenResponse, ProviderError> {
        request
            .validate()
            .map_err(|e| ProviderError::InvalidRequest(e.to_string()))?;
        if self.config.api_key.is_empty() {
            return Err(ProviderError::Auth("no API credential configured".into()));
        }
        let body = self.request_body(request);

        self.semaphore.acquire();
        let result = self.generate_with_retries(&body, &request.model);
        self.semaphore.release();
        result
    }

    fn supports_images(&self) -> bool {
        self.config.supports_images
    }

    fn name(&self) -> &'static str {
        "http"
    }
}

impl<T: ChatTransport> HttpProvider<T> {
    fn generate_with_retries(
        &self,
        body: &serde_json::Value,
        model: &str,
    ) -> Result<GenResponse, ProviderError> {
        let mut attempts = 0u32;
        let mut last_error = String::new();
        while attempts <= self.config.max_retries {
            attempts += 1;
            match self
                .transport
                .send(&self.config.endpoint, &self.config.api_key, body)
            {
                Ok(reply) if reply.status == 200 => return self.parse_reply(&reply.body, model),
                Ok(reply) if reply.status == 401 || reply.status == 403 => {
                    // Credential problems never resolve by retrying.
                    return Err(ProviderError::Auth(format!(
                        "HTTP {}: {}",
                        reply.status,
                        truncate(&reply.body)
                    )));
                }
                Ok(reply) if reply.status == 429 || reply.status >= 500 => {
                    last_error = format!("HTTP {}: {}", reply.status, truncate(&reply.body));
                }
                Ok(reply) => {
                    return Err(ProviderError::Protocol(format!(
                        "HTTP {}: {}",
                        reply.status,
                        truncate(&reply.body)
                    )));
                }
                Err(message) => last_error = message,
            }
            if attempts <= self.config.max_retries {
                let factor = 1u32 << (attempts - 1).min(8);
                std::thread::sleep(self.config.backoff * factor);
            }
        }
        Err(ProviderError::Transport {
            message: last_error,
            attempts,
        })
    }
}

fn truncate(s: &str) -> String {
    const LIMIT: usize = 200;
    if s.len() <= LIMIT {
        s.to_string()
    } else {
        format!("{}...", &s[..LIMIT])
    }
}

/// Blocking reqwest transport against `{endpoint}/chat/completions`.
pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> ReqwestTransport {
        ReqwestTransport {
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(120))
                .build()
                .expect("client construction cannot fail with static config"),
        }
    }
}

impl Default for ReqwestTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl ChatTransport for ReqwestTransport {
    fn send(
        &self,
        endpoint: &str,
        api_key: &str,
        body: &serde_json::Value,
    ) -> Result<TransportReply, String> {
        let url = format!("{}/chat/completions", endpoint.trim_end_matches('/'));
        let response = self
            .client
            .post(url)
            .bearer_auth(api_key)
            .json(body)
            .send()
            .map_err(|e| e.to_string())?;
        let status = response.status().as_u16();
        let body = response.text().map_err(|e| e.to_string())?;
        Ok(TransportReply { status, body })
    }
}

/// Loads the credential for a live run from the named environment variable.
pub fn api_key_from_env(var: &str) -> Result<String, ProviderError> {
    std::env::var(var)
        .map_err(|_| ProviderError::Auth(format!("environment variable {var} is not set")))
}
