//! OpenAI-compatible chat-completions backend.
//!
//! Sends the prompt as a single user message and returns the first choice's
//! content. Transport failures and 5xx responses are retried with exponential
//! backoff (at most `max_retries` retries); 4xx responses fail fast since
//! resending the same request cannot fix them.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{LlmError, TokenUsage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpLlmConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub timeout_secs: u64,
    /// Retries after the first attempt, for transport errors and 5xx only.
    pub max_retries: u32,
    /// Sent as `Authorization: Bearer ...` when present.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub api_key: Option<String>,
}

impl Default for HttpLlmConfig {
    fn default() -> Self {
        HttpLlmConfig {
            endpoint: String::new(),
            model: String::new(),
            temperature: 0.7,
            timeout_secs: 60,
            max_retries: 3,
            api_key: None,
        }
    }
}

/// Raw completion text plus reported usage.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub usage: Option<TokenUsage>,
}

pub struct HttpBackend {
    agent: ureq::Agent,
    config: HttpLlmConfig,
    backoff_base: Duration,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<UsageBody>,
}

#[derive(Deserialize)]
struct Choice {
    message: MessageBody,
}

#[derive(Deserialize)]
struct MessageBody {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct UsageBody {
    #[serde(default)]
    prompt_tokens: Option<u64>,
    #[serde(default)]
    completion_tokens: Option<u64>,
}

impl HttpBackend {
    pub fn new(config: HttpLlmConfig) -> HttpBackend {
        let agent_config = ureq::config::Config::builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build();
        HttpBackend {
            agent: ureq::Agent::new_with_config(agent_config),
            config,
            backoff_base: Duration::from_millis(250),
        }
    }

    /// Overrides the base retry delay. Tests against a local server shrink it
    /// so retry paths run in milliseconds.
    pub fn with_backoff(mut self, base: Duration) -> HttpBackend {
        self.backoff_base = base;
        self
    }

    /// Sends one prompt and returns the completion text.
    pub fn complete(&mut self, prompt: &str) -> Result<Completion, LlmError> {
        let payload = ChatRequest {
            model: &self.config.model,
            messages: [ChatMessage { role: "user", content: prompt }],
            temperature: self.config.temperature,
        };

        let attempts = 1 + self.config.max_retries;
        let mut last_failure = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.backoff_base * 2u32.pow(attempt - 1));
            }
            let mut request = self.agent.post(&self.config.endpoint);
            if let Some(key) = &self.config.api_key {
                request = request.header("authorization", &format!("Bearer {key}"));
            }
            match request.send_json(&payload) {
                Ok(mut response) => {
                    let status = response.status().as_u16();
                    if (200..300).contains(&status) {
                        let body: ChatResponse =
                            response.body_mut().read_json().map_err(|e| {
                                LlmError::Malformed(format!("response body: {e}"))
                            })?;
                        return extract_completion(body);
                    }
                    let body = response
                        .body_mut()
                        .read_to_string()
                        .unwrap_or_else(|_| String::from("<unreadable body>"));
                    if (500..600).contains(&status) {
                        last_failure = format!("status {status}: {body}");
                        continue;
                    }
                    return Err(LlmError::Http { status, body });
                }
                Err(e) => {
                    last_failure = e.to_string();
                    continue;
                }
            }
        }
        Err(LlmError::Transport { attempts, detail: last_failure })
    }
}

fn extract_completion(body: ChatResponse) -> Result<Completion, LlmError> {
    let choice = body
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| LlmError::Malformed("no choices in response".into()))?;
    let text = choice
        .message
        .content
        .ok_or_else(|| LlmError::Malformed("choice carries no content".into()))?;
    let usage = body.usage.and_then(|u| match (u.prompt_tokens, u.completion_tokens) {
        (Some(p), Some(c)) => Some(TokenUsage { prompt_tokens: p, completion_tokens: c }),
        _ => None,
    });
    Ok(Completion { text, usage })
}
