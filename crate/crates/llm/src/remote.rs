//! Optional remote HTTP backend.
//!
//! JSON request `{model, prompt, max_tokens, temperature}`, JSON response
//! `{text, prompt_tokens?, completion_tokens?}`. The API key is read from
//! the environment variable named in the config, never from a file. A fixed
//! three-attempt retry policy covers transient transport failures.

use crate::{count_tokens, BackendError, GenerationRequest, GenerationResponse, TextBackend};
use serde::Deserialize;
use serde_json::json;
use std::time::Duration;

const ATTEMPTS: usize = 3;

#[derive(Debug, Clone, Deserialize)]
pub struct RemoteBackendConfig {
    pub url: String,
    pub model: String,
    /// Name of the environment variable holding the API key, if any.
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    30
}

pub struct RemoteBackend {
    config: RemoteBackendConfig,
    id: String,
}

#[derive(Debug, Deserialize)]
struct RemoteResponse {
    text: String,
    prompt_tokens: Option<u64>,
    completion_tokens: Option<u64>,
}

impl RemoteBackend {
    pub fn new(config: RemoteBackendConfig) -> Self {
        let id = format!("remote:{}", config.model);
        RemoteBackend { config, id }
    }

    fn call_once(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(self.config.timeout_secs))
            .build();
        let mut http = agent
            .post(&self.config.url)
            .set("Content-Type", "application/json");
        if let Some(env_name) = &self.config.api_key_env {
            if let Ok(key) = std::env::var(env_name) {
                http = http.set("Authorization", &format!("Bearer {key}"));
            }
        }
        let payload = json!({
            "model": self.config.model,
            "prompt": request.prompt,
            "max_tokens": request.max_len,
            "temperature": request.temperature,
            "role": request.role.as_str(),
        });
        let response = http
            .send_string(&payload.to_string())
            .map_err(|e| BackendError::BackendUnavailable(e.to_string()))?;
        let body = response
            .into_string()
            .map_err(|e| BackendError::BackendUnavailable(e.to_string()))?;
        let decoded: RemoteResponse = serde_json::from_str(&body)
            .map_err(|e| BackendError::BackendUnavailable(format!("bad response: {e}")))?;
        // Fall back to the local tokenizer when the backend reports nothing.
        let prompt_tokens = decoded
            .prompt_tokens
            .unwrap_or_else(|| count_tokens(&request.prompt));
        let completion_tokens = decoded
            .completion_tokens
            .unwrap_or_else(|| count_tokens(&decoded.text));
        Ok(GenerationResponse {
            text: decoded.text,
            prompt_tokens,
            completion_tokens,
            backend_id: self.id.clone(),
        })
    }
}

impl TextBackend for RemoteBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        if request.prompt.trim().is_empty() {
            return Err(BackendError::EmptyPrompt);
        }
        let mut last_error = BackendError::BackendUnavailable("no attempt made".into());
        for _ in 0..ATTEMPTS {
            match self.call_once(request) {
                Ok(response) => return Ok(response),
                Err(e) => last_error = e,
            }
        }
        Err(last_error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Role;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    #[test]
    fn decodes_remote_response_and_counts_tokens_locally() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            if let Ok((mut stream, _)) = listener.accept() {
                let mut buf = [0u8; 8192];
                let _ = stream.read(&mut buf);
                let body = r#"{"text":"alpha beta"}"#;
                let response = format!(
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });
        let backend = RemoteBackend::new(RemoteBackendConfig {
            url: format!("http://{addr}/generate"),
            model: "test-model".into(),
            api_key_env: None,
            timeout_secs: 2,
        });
        let response = backend
            .generate(&GenerationRequest::new(Role::Summarize, "hi there"))
            .unwrap();
        assert_eq!(response.text, "alpha beta");
        assert_eq!(response.completion_tokens, 2);
        assert_eq!(response.backend_id, "remote:test-model");
    }

    #[test]
    fn unreachable_backend_reports_unavailable_after_retries() {
        let backend = RemoteBackend::new(RemoteBackendConfig {
            url: "http://127.0.0.1:9/generate".into(),
            model: "m".into(),
            api_key_env: None,
            timeout_secs: 1,
        });
        let err = backend
            .generate(&GenerationRequest::new(Role::Summarize, "hi"))
            .unwrap_err();
        assert!(matches!(err, BackendError::BackendUnavailable(_)));
    }
}
