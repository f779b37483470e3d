use std::path::PathBuf;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::config::{ModelConfig, ProviderConfig, ProviderKind};
use crate::prompt::PromptKind;
use crate::summary_id;
use crate::GatewayError;

#[derive(Debug, Clone, Copy)]
pub struct CompletionRequest<'a> {
    pub filing_id: &'a str,
    pub shuffle_seed: Option<u64>,
    pub model: &'a ModelConfig,
    pub kind: PromptKind,
    pub prompt: &'a str,
    /// The (possibly truncated) document alone, for endpoints that take raw text.
    pub document_text: &'a str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub request: Value,
    pub response: Value,
}

pub trait Provider: Send + Sync {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Completion, GatewayError>;
}

/// Bounded in-flight requests plus an optional minimum spacing between starts.
pub struct Throttle {
    max_in_flight: usize,
    min_interval: Option<Duration>,
    state: Mutex<ThrottleState>,
    freed: Condvar,
}

struct ThrottleState {
    in_flight: usize,
    next_start: Instant,
}

pub struct Permit<'a>(&'a Throttle);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut s = self.0.state.lock().expect("throttle lock poisoned");
        s.in_flight -= 1;
        self.0.freed.notify_one();
    }
}

impl Throttle {
    pub fn new(max_in_flight: usize, requests_per_minute: Option<u32>) -> Self {
        Self {
            max_in_flight: max_in_flight.max(1),
            min_interval: requests_per_minute
                .filter(|r| *r > 0)
                .map(|r| Duration::from_secs_f64(60.0 / r as f64)),
            state: Mutex::new(ThrottleState {
                in_flight: 0,
                next_start: Instant::now(),
            }),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut s = self.state.lock().expect("throttle lock poisoned");
        while s.in_flight >= self.max_in_flight {
            s = self.freed.wait(s).expect("throttle lock poisoned");
        }
        s.in_flight += 1;
        let wait = match self.min_interval {
            Some(iv) => {
                let now = Instant::now();
                let start = s.next_start.max(now);
                s.next_start = start + iv;
                start - now
            }
            None => Duration::ZERO,
        };
        drop(s);
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
        Permit(self)
    }
}

pub struct HttpProvider {
    id: String,
    kind: ProviderKind,
    base_url: String,
    api_key_env: Option<String>,
    agent: ureq::Agent,
    throttle: Throttle,
    max_retries: u32,
    /// Wait before a retry when the server gives no retry-after.
    pub backoff: Duration,
}

impl HttpProvider {
    pub fn new(id: &str, config: &ProviderConfig) -> Result<Self, GatewayError> {
        let default_url = match config.kind {
            ProviderKind::Anthropic => "https://api.anthropic.com",
            ProviderKind::OpenAi => "https://api.openai.com",
            ProviderKind::Cohere => "https://api.cohere.ai",
            ProviderKind::Import => return Err(GatewayError::Config(format!("provider {id} is not an HTTP provider"))),
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        Ok(Self {
            id: id.to_string(),
            kind: config.kind,
            base_url: config.base_url.clone().unwrap_or_else(|| default_url.into()).trim_end_matches('/').into(),
            api_key_env: config.api_key_env.clone(),
            agent,
            throttle: Throttle::new(config.max_in_flight, config.requests_per_minute),
            max_retries: config.max_retries,
            backoff: Duration::from_millis(500),
        })
    }

    fn endpoint(&self, req: &CompletionRequest<'_>) -> (String, Value) {
        let m = req.model;
        match self.kind {
            ProviderKind::Anthropic => {
                let mut body = json!({
                    "model": m.model_name,
                    "max_tokens": m.max_output_tokens,
                    "messages": [{"role": "user", "content": req.prompt}],
                });
                if let Some(t) = m.temperature {
                    body["temperature"] = json!(t);
                }
                (format!("{}/v1/messages", self.base_url), body)
            }
            ProviderKind::OpenAi => {
                let mut body = json!({
                    "model": m.model_name,
                    "messages": [{"role": "user", "content": req.prompt}],
                });
                if let Some(t) = m.temperature {
                    body["temperature"] = json!(t);
                }
                (format!("{}/v1/chat/completions", self.base_url), body)
            }
            // The summarize endpoint takes the report itself, not a prompt.
            ProviderKind::Cohere => (
                format!("{}/v1/summarize", self.base_url),
                json!({
                    "text": req.document_text,
                    "model": m.model_name,
                    "length": "long",
                    "format": "bullets",
                    "extractiveness": "high",
                    "temperature": m.temperature.unwrap_or(0.3),
                }),
            ),
            ProviderKind::Import => unreachable!(),
        }
    }

    fn error(&self, status: Option<u16>, retry_after: Option<Duration>, message: impl Into<String>) -> GatewayError {
        GatewayError::Provider {
            provider: self.id.clone(),
            status,
            retry_after,
            message: message.into(),
        }
    }
}

pub fn response_text(kind: ProviderKind, body: &Value) -> Option<String> {
    let text = match kind {
        ProviderKind::Anthropic => body["content"]
            .as_array()?
            .iter()
            .filter_map(|c| c["text"].as_str())
            .collect::<Vec<_>>()
            .join(""),
        ProviderKind::OpenAi => body["choices"][0]["message"]["content"].as_str()?.to_string(),
        ProviderKind::Cohere => body["summary"].as_str()?.to_string(),
        ProviderKind::Import => return None,
    };
    Some(text)
}

/// Seconds form of retry-after; HTTP dates are not honored.
fn parse_retry_after(value: &str) -> Option<Duration> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|s| s.is_finite() && *s >= 0.0)
        .map(Duration::from_secs_f64)
}

impl Provider for HttpProvider {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Completion, GatewayError> {
        let key = match &self.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| GatewayError::MissingApiKey(var.clone()))?),
            None => None,
        };
        let (url, body) = self.endpoint(req);
        let mut attempt = 0;
        loop {
            let permit = self.throttle.acquire();
            let mut call = self.agent.post(&url);
            if let Some(key) = &key {
                call = match self.kind {
                    ProviderKind::Anthropic => call.header("x-api-key", key).header("anthropic-version", "2023-06-01"),
                    _ => call.header("authorization", format!("Bearer {key}")),
                };
            }
            let outcome = call.send_json(&body);
            drop(permit);
            let (err, wait) = match outcome {
                Err(e) => (self.error(None, None, e.to_string()), None),
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    let retry_after = resp
                        .headers()
                        .get("retry-after")
                        .and_then(|v| v.to_str().ok())
                        .and_then(parse_retry_after);
                    let text = resp.body_mut().read_to_string().unwrap_or_default();
                    if (200..300).contains(&status) {
                        let response: Value = serde_json::from_str(&text)
                            .map_err(|e| self.error(Some(status), None, format!("bad JSON: {e}")))?;
                        let summary = response_text(self.kind, &response)
                            .ok_or_else(|| self.error(Some(status), None, "response has no summary text"))?;
                        return Ok(Completion {
                            text: summary,
                            request: body,
                            response,
                        });
                    }
                    let err = self.error(Some(status), retry_after, text);
                    if status != 429 && status < 500 {
                        return Err(err);
                    }
                    (err, retry_after)
                }
            };
            if attempt >= self.max_retries {
                return Err(err);
            }
            let wait = wait.unwrap_or(self.backoff * 2u32.pow(attempt));
            tracing::warn!(provider = %self.id, attempt, ?wait, "retrying after provider error: {err}");
            std::thread::sleep(wait);
            attempt += 1;
        }
    }
}

/// Summaries generated elsewhere, one `{summary_id}.txt` per summary.
pub struct ImportProvider {
    pub dir: PathBuf,
}

impl Provider for ImportProvider {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Completion, GatewayError> {
        let id = summary_id(req.filing_id, req.shuffle_seed, &req.model.model_name, req.kind);
        let file = format!("{id}.txt");
        let path = self.dir.join(&file);
        let text = std::fs::read_to_string(&path).map_err(|e| GatewayError::Provider {
            provider: "import".into(),
            status: None,
            retry_after: None,
            message: format!("{}: {e}", path.display()),
        })?;
        Ok(Completion {
            text: text.trim_end().to_string(),
            request: json!({ "file": file }),
            response: json!({ "text": text }),
        })
    }
}

pub fn build_provider(id: &str, config: &ProviderConfig) -> Result<Box<dyn Provider>, GatewayError> {
    match config.kind {
        ProviderKind::Import => Ok(Box::new(ImportProvider {
            dir: config.dir.clone().ok_or_else(|| GatewayError::Config(format!("provider {id}: import needs dir")))?,
        })),
        _ => Ok(Box::new(HttpProvider::new(id, config)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_each_response_shape() {
        let a = json!({"content": [{"type": "text", "text": "A"}, {"type": "text", "text": "B"}]});
        assert_eq!(response_text(ProviderKind::Anthropic, &a).unwrap(), "AB");
        let o = json!({"choices": [{"message": {"role": "assistant", "content": "O"}}]});
        assert_eq!(response_text(ProviderKind::OpenAi, &o).unwrap(), "O");
        assert_eq!(response_text(ProviderKind::Cohere, &json!({"summary": "C"})).unwrap(), "C");
        assert_eq!(response_text(ProviderKind::OpenAi, &json!({})), None);
    }

    #[test]
    fn retry_after_seconds() {
        assert_eq!(parse_retry_after("2"), Some(Duration::from_secs(2)));
        assert_eq!(parse_retry_after(" 0.5 "), Some(Duration::from_millis(500)));
        assert_eq!(parse_retry_after("Wed, 21 Oct 2015 07:28:00 GMT"), None);
        assert_eq!(parse_retry_after("-1"), None);
    }
}
