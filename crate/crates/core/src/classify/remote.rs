//! Client for an external text-completion service used as a classifier.
//!
//! Wire format: `POST <endpoint>` with body `{"model": .., "prompt": ..}`;
//! the service replies `{"text": ..}` where `text` must be a single class
//! word (case-insensitive, surrounding whitespace allowed).

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Classifier, ClassifyError, Prediction, PredictionSource};
use crate::corpus::Fragment;
use crate::label::SentimentLabel;
use crate::retry::RetryPolicy;

/// Prompt shipped with the tool. Written for this project; adjust it to the
/// model in use, keeping the single `{text}` slot and the one-word answer.
pub const DEFAULT_PROMPT_TEMPLATE: &str = "You are screening news and social media text for adverse media \
relevant to anti-money-laundering compliance at a mobile financial services provider. \
The text may be English, Bangla or a mix of both. \
Classify the sentiment of the text as exactly one word: negative, neutral or positive. \
Use negative for fraud, theft, scams, money laundering, arrests, complaints or other adverse information. \
Answer with the single word only.\n\nText: {text}\n\nAnswer:";

const TEXT_SLOT: &str = "{text}";

pub const ENV_ENDPOINT: &str = "MEDIASCREEN_REMOTE_ENDPOINT";
pub const ENV_MODEL: &str = "MEDIASCREEN_REMOTE_MODEL";
pub const ENV_TIMEOUT_MS: &str = "MEDIASCREEN_REMOTE_TIMEOUT_MS";
pub const ENV_MAX_RETRIES: &str = "MEDIASCREEN_REMOTE_MAX_RETRIES";
pub const ENV_API_KEY: &str = "MEDIASCREEN_REMOTE_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteAdapterConfig {
    pub endpoint: String,
    pub model_name: String,
    pub prompt_template: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub backoff_ms: u64,
    /// Requests in flight during batch screening.
    pub parallelism: usize,
    /// Sent as a bearer token. Never written back out.
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
}

impl Default for RemoteAdapterConfig {
    fn default() -> Self {
        RemoteAdapterConfig {
            endpoint: String::new(),
            model_name: "default".to_string(),
            prompt_template: DEFAULT_PROMPT_TEMPLATE.to_string(),
            timeout_ms: 30_000,
            max_retries: 3,
            backoff_ms: 1_000,
            parallelism: 4,
            api_key: None,
        }
    }
}

impl RemoteAdapterConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteAdapterConfig { endpoint: endpoint.into(), ..Default::default() }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    /// Reads a TOML config file with the same field names as this struct.
    pub fn from_toml_file(path: &Path) -> Result<Self, ClassifyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClassifyError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ClassifyError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies `MEDIASCREEN_REMOTE_*` overrides from the environment.
    pub fn with_env_overrides(self) -> Result<Self, ClassifyError> {
        self.with_overrides(|key| std::env::var(key).ok())
    }

    pub fn with_overrides(mut self, get: impl Fn(&str) -> Option<String>) -> Result<Self, ClassifyError> {
        if let Some(v) = get(ENV_ENDPOINT) {
            self.endpoint = v;
        }
        if let Some(v) = get(ENV_MODEL) {
            self.model_name = v;
        }
        if let Some(v) = get(ENV_TIMEOUT_MS) {
            self.timeout_ms = v.parse().map_err(|_| ClassifyError::Config(format!("{ENV_TIMEOUT_MS}={v}")))?;
        }
        if let Some(v) = get(ENV_MAX_RETRIES) {
            self.max_retries = v.parse().map_err(|_| ClassifyError::Config(format!("{ENV_MAX_RETRIES}={v}")))?;
        }
        if let Some(v) = get(ENV_API_KEY) {
            self.api_key = Some(v);
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        if !(self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://")) {
            return Err(ClassifyError::Config(format!("endpoint `{}` is not an http(s) URL", self.endpoint)));
        }
        let slots = self.prompt_template.matches(TEXT_SLOT).count();
        if slots != 1 {
            return Err(ClassifyError::Config(format!("prompt template must contain exactly one {TEXT_SLOT} slot, found {slots}")));
        }
        Ok(())
    }

    pub fn render_prompt(&self, text: &str) -> String {
        self.prompt_template.replacen(TEXT_SLOT, text, 1)
    }
}

/// Parses the service's answer into a label.
pub fn parse_remote_answer(raw: &str) -> Result<SentimentLabel, ClassifyError> {
    raw.parse().map_err(|_| ClassifyError::Protocol { raw: raw.to_string() })
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

enum AttemptError {
    Timeout(String),
    Transport(String),
    Final(ClassifyError),
}

pub struct RemoteClassifier {
    config: RemoteAdapterConfig,
    agent: ureq::Agent,
    retry: RetryPolicy,
}

impl RemoteClassifier {
    pub fn new(config: RemoteAdapterConfig) -> Result<Self, ClassifyError> {
        config.validate()?;
        let agent_config = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout()))
            .http_status_as_error(false)
            .build();
        let retry = RetryPolicy {
            max_retries: config.max_retries,
            base_delay: Duration::from_millis(config.backoff_ms),
            max_delay: Duration::from_secs(60),
        };
        Ok(RemoteClassifier { agent: ureq::Agent::new_with_config(agent_config), config, retry })
    }

    pub fn config(&self) -> &RemoteAdapterConfig {
        &self.config
    }

    fn attempt(&self, prompt: &str) -> Result<SentimentLabel, AttemptError> {
        let mut request = self.agent.post(&self.config.endpoint);
        if let Some(key) = &self.config.api_key {
            request = request.header("Authorization", format!("Bearer {key}"));
        }
        let body = CompletionRequest { model: &self.config.model_name, prompt };
        let mut response = request.send_json(&body).map_err(classify_transport)?;
        let status = response.status().as_u16();
        if status >= 500 {
            return Err(AttemptError::Transport(format!("HTTP {status}")));
        }
        if status >= 400 {
            return Err(AttemptError::Final(ClassifyError::Http { status }));
        }
        let raw = response.body_mut().read_to_string().map_err(classify_transport)?;
        let parsed: CompletionResponse =
            serde_json::from_str(&raw).map_err(|_| AttemptError::Final(ClassifyError::Protocol { raw: raw.clone() }))?;
        parse_remote_answer(&parsed.text).map_err(AttemptError::Final)
    }
}

fn classify_transport(e: ureq::Error) -> AttemptError {
    match e {
        ureq::Error::Timeout(t) => AttemptError::Timeout(t.to_string()),
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => AttemptError::Timeout(io.to_string()),
        other => AttemptError::Transport(other.to_string()),
    }
}

impl Classifier for RemoteClassifier {
    fn descriptor(&self) -> String {
        format!("remote(model={}, endpoint={})", self.config.model_name, self.config.endpoint)
    }

    fn classify(&self, fragment: &Fragment) -> Result<Prediction, ClassifyError> {
        let prompt = self.config.render_prompt(&fragment.text);
        let outcome = self.retry.run(
            |_| self.attempt(&prompt),
            |e| matches!(e, AttemptError::Timeout(_) | AttemptError::Transport(_)),
        );
        match outcome {
            Ok(label) => Ok(Prediction::degenerate(label, PredictionSource::Remote)),
            Err(failure) => Err(match failure.error {
                AttemptError::Timeout(message) => ClassifyError::Unavailable { attempts: failure.attempts, message },
                AttemptError::Transport(message) => ClassifyError::Transport { attempts: failure.attempts, message },
                AttemptError::Final(e) => e,
            }),
        }
    }

    fn max_parallelism(&self) -> usize {
        self.config.parallelism.max(1)
    }
}
