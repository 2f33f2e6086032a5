use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::LlmError;

/// Environment variable holding the bearer token for the endpoint.
pub const API_KEY_ENV: &str = "APHASYNTH_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub repetition_penalty: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            temperature: 0.7,
            top_p: 0.9,
            repetition_penalty: 1.0,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<(), LlmError> {
        let bad = |m: &str| Err(LlmError::InvalidSettings(m.to_string()));
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return bad("temperature must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.top_p) || self.top_p == 0.0 {
            return bad("top_p must be in (0, 1]");
        }
        if self.repetition_penalty.is_nan() || self.repetition_penalty <= 0.0 {
            return bad("repetition_penalty must be > 0");
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq)]
pub struct EndpointConfig {
    /// Base URL up to and including the API version, e.g.
    /// `http://localhost:8000/v1`. Requests go to `<base_url>/chat/completions`.
    pub base_url: String,
    pub model_name: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub max_parallel: usize,
    /// Delay before the first retry; doubles on each further retry.
    pub retry_backoff: Duration,
    pub api_key: Option<String>,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "http://localhost:8000/v1".to_string(),
            model_name: "mistral-7b-instruct".to_string(),
            timeout: Duration::from_secs(120),
            max_retries: 3,
            max_parallel: 4,
            retry_backoff: Duration::from_millis(500),
            api_key: None,
        }
    }
}

// The key must never reach logs.
impl fmt::Debug for EndpointConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EndpointConfig")
            .field("base_url", &self.base_url)
            .field("model_name", &self.model_name)
            .field("timeout", &self.timeout)
            .field("max_retries", &self.max_retries)
            .field("max_parallel", &self.max_parallel)
            .field("retry_backoff", &self.retry_backoff)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.timeout.is_zero() {
            return Err(LlmError::InvalidSettings("timeout must be > 0".into()));
        }
        if self.max_parallel == 0 {
            return Err(LlmError::InvalidSettings(
                "max_parallel must be >= 1".into(),
            ));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(LlmError::InvalidSettings(format!(
                "base_url `{}` is not an http(s) URL",
                self.base_url
            )));
        }
        Ok(())
    }

    pub fn completions_url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

/// Something that turns a system and a user segment into generated text.
pub trait CompletionBackend: Send + Sync {
    fn model_name(&self) -> &str;

    fn complete(
        &self,
        system: &str,
        user: &str,
        params: &SamplingParams,
    ) -> Result<String, LlmError>;
}

/// Blocking client for an OpenAI-compatible `/chat/completions` endpoint.
pub struct HttpChatClient {
    endpoint: EndpointConfig,
    agent: ureq::Agent,
}

impl HttpChatClient {
    pub fn new(endpoint: EndpointConfig) -> Result<Self, LlmError> {
        endpoint.validate()?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(endpoint.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpChatClient { endpoint, agent })
    }

    pub fn endpoint(&self) -> &EndpointConfig {
        &self.endpoint
    }

    /// Request body. `repetition_penalty` is a top-level extension field
    /// understood by vLLM, TGI and similar servers.
    pub fn payload(&self, system: &str, user: &str, params: &SamplingParams) -> Value {
        json!({
            "model": self.endpoint.model_name,
            "messages": [
                { "role": "system", "content": system },
                { "role": "user", "content": user },
            ],
            "temperature": params.temperature,
            "top_p": params.top_p,
            "repetition_penalty": params.repetition_penalty,
        })
    }

    fn attempt(&self, body: &str) -> Result<String, Attempt> {
        let mut request = self
            .agent
            .post(&self.endpoint.completions_url())
            .header("Content-Type", "application/json");
        if let Some(key) = &self.endpoint.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = match request.send(body) {
            Ok(r) => r,
            Err(e) => return Err(Attempt::Retry(LlmError::EndpointUnreachable(e.to_string()))),
        };
        let status = response.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(Attempt::Retry(LlmError::HttpError(status)));
        }
        if !(200..300).contains(&status) {
            return Err(Attempt::Fatal(LlmError::HttpError(status)));
        }
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| Attempt::Retry(LlmError::EndpointUnreachable(e.to_string())))?;
        extract_content(&text).map_err(Attempt::Fatal)
    }
}

enum Attempt {
    Retry(LlmError),
    Fatal(LlmError),
}

#[derive(Deserialize)]
struct ChatResponse {
    #[serde(default)]
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Option<Message>,
    text: Option<String>,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

/// First choice's text, trimmed. Accepts chat (`message.content`) and
/// legacy completion (`text`) shapes.
fn extract_content(body: &str) -> Result<String, LlmError> {
    let parsed: ChatResponse =
        serde_json::from_str(body).map_err(|e| LlmError::BadResponse(e.to_string()))?;
    let first = parsed
        .choices
        .into_iter()
        .next()
        .ok_or(LlmError::EmptyCompletion)?;
    let text = first
        .message
        .and_then(|m| m.content)
        .or(first.text)
        .unwrap_or_default();
    let text = text.trim();
    if text.is_empty() {
        return Err(LlmError::EmptyCompletion);
    }
    Ok(text.to_string())
}

impl CompletionBackend for HttpChatClient {
    fn model_name(&self) -> &str {
        &self.endpoint.model_name
    }

    fn complete(
        &self,
        system: &str,
        user: &str,
        params: &SamplingParams,
    ) -> Result<String, LlmError> {
        params.validate()?;
        let body = self.payload(system, user, params).to_string();
        let mut delay = self.endpoint.retry_backoff;
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) if attempt >= self.endpoint.max_retries => return Err(e),
                Err(Attempt::Retry(e)) => {
                    log::debug!("request failed ({e}); retrying in {delay:?}");
                    std::thread::sleep(delay);
                    delay = delay.saturating_mul(2);
                    attempt += 1;
                }
            }
        }
    }
}

/// Issues a single chat-completion request and returns the generated text.
pub fn request_completion(
    endpoint: &EndpointConfig,
    system_text: &str,
    user_text: &str,
    params: &SamplingParams,
) -> Result<String, LlmError> {
    HttpChatClient::new(endpoint.clone())?.complete(system_text, user_text, params)
}
