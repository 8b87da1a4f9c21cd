//! Text-generation backends behind one interface.
//!
//! The default backend is a deterministic rule dispatcher: agents register a
//! pure handler per role, so identical requests always produce identical
//! responses and no external model is ever required. A remote HTTP backend
//! can be configured instead; it is optional and nothing in the test suite
//! depends on it.

pub mod remote;
pub mod tokenizer;

pub use remote::{RemoteBackend, RemoteBackendConfig};
pub use tokenizer::count_tokens;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

/// What a generation request is for. Each role has its own prompt/response
/// conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Decompose,
    Clarify,
    Synthesize,
    Summarize,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Decompose => "decompose",
            Role::Clarify => "clarify",
            Role::Synthesize => "synthesize",
            Role::Summarize => "summarize",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerationRequest {
    pub role: Role,
    pub prompt: String,
    /// Maximum decode length in tokens.
    pub max_len: u32,
    pub beam_width: u32,
    pub temperature: f64,
}

impl GenerationRequest {
    pub fn new(role: Role, prompt: impl Into<String>) -> Self {
        GenerationRequest {
            role,
            prompt: prompt.into(),
            max_len: 512,
            beam_width: 1,
            temperature: 0.0,
        }
    }

    fn validate(&self) -> Result<(), BackendError> {
        if self.prompt.trim().is_empty() {
            return Err(BackendError::EmptyPrompt);
        }
        if self.beam_width < 1 {
            return Err(BackendError::InvalidRequest(
                "beam width must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationResponse {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub backend_id: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("prompt must not be empty")]
    EmptyPrompt,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("token budget exceeded: used {used} of {ceiling}")]
    BudgetExceeded { used: u64, ceiling: u64 },
}

/// Global token accounting with an optional hard ceiling.
#[derive(Debug, Default)]
pub struct TokenBudget {
    used: AtomicU64,
    ceiling: Option<u64>,
}

impl TokenBudget {
    pub fn unlimited() -> Arc<Self> {
        Arc::new(TokenBudget::default())
    }

    pub fn with_ceiling(ceiling: u64) -> Arc<Self> {
        Arc::new(TokenBudget {
            used: AtomicU64::new(0),
            ceiling: Some(ceiling),
        })
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::SeqCst)
    }

    pub fn charge(&self, tokens: u64) -> Result<(), BackendError> {
        let used = self.used.fetch_add(tokens, Ordering::SeqCst) + tokens;
        match self.ceiling {
            Some(ceiling) if used > ceiling => Err(BackendError::BudgetExceeded { used, ceiling }),
            _ => Ok(()),
        }
    }
}

pub trait TextBackend: Send + Sync {
    fn id(&self) -> &str;
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError>;
}

/// A pure function from prompt to response text for one role.
pub type RoleRule = Box<dyn Fn(&str) -> String + Send + Sync>;

/// Deterministic backend: dispatches each role to a registered pure rule.
/// Roles without a rule yield a structured refusal rather than an error.
pub struct RuleBackend {
    rules: BTreeMap<Role, RoleRule>,
    budget: Arc<TokenBudget>,
}

impl RuleBackend {
    pub fn new() -> Self {
        RuleBackend {
            rules: BTreeMap::new(),
            budget: TokenBudget::unlimited(),
        }
    }

    pub fn with_budget(mut self, budget: Arc<TokenBudget>) -> Self {
        self.budget = budget;
        self
    }

    pub fn register(mut self, role: Role, rule: RoleRule) -> Self {
        self.rules.insert(role, rule);
        self
    }
}

impl Default for RuleBackend {
    fn default() -> Self {
        Self::new()
    }
}

pub const RULE_BACKEND_ID: &str = "rule-backend";

impl TextBackend for RuleBackend {
    fn id(&self) -> &str {
        RULE_BACKEND_ID
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        request.validate()?;
        let text = match self.rules.get(&request.role) {
            Some(rule) => rule(&request.prompt),
            None => format!(
                "{{\"refusal\":\"no rule registered for role {}\"}}",
                request.role.as_str()
            ),
        };
        let prompt_tokens = count_tokens(&request.prompt);
        let completion_tokens = count_tokens(&text);
        self.budget.charge(prompt_tokens + completion_tokens)?;
        Ok(GenerationResponse {
            text,
            prompt_tokens,
            completion_tokens,
            backend_id: RULE_BACKEND_ID.to_string(),
        })
    }
}

/// One recorded backend call, for trace-level token accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CallRecord {
    pub role: Role,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub backend_id: String,
}

/// Wraps a backend and records every call, so a pipeline trace can account
/// for all tokens spent on one question.
pub struct RecordingBackend {
    inner: Arc<dyn TextBackend>,
    calls: Mutex<Vec<CallRecord>>,
}

impl RecordingBackend {
    pub fn new(inner: Arc<dyn TextBackend>) -> Self {
        RecordingBackend {
            inner,
            calls: Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> Vec<CallRecord> {
        self.calls.lock().unwrap().clone()
    }

    pub fn total_tokens(&self) -> u64 {
        self.calls
            .lock()
            .unwrap()
            .iter()
            .map(|c| c.prompt_tokens + c.completion_tokens)
            .sum()
    }
}

impl TextBackend for RecordingBackend {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let response = self.inner.generate(request)?;
        self.calls.lock().unwrap().push(CallRecord {
            role: request.role,
            prompt_tokens: response.prompt_tokens,
            completion_tokens: response.completion_tokens,
            backend_id: response.backend_id.clone(),
        });
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn echo_backend() -> RuleBackend {
        RuleBackend::new().register(Role::Decompose, Box::new(|p: &str| format!("echo: {p}")))
    }

    #[test]
    fn empty_prompt_rejected_before_dispatch() {
        let backend = echo_backend();
        let err = backend
            .generate(&GenerationRequest::new(Role::Decompose, "  "))
            .unwrap_err();
        assert_eq!(err, BackendError::EmptyPrompt);
    }

    #[test]
    fn identical_requests_yield_identical_responses() {
        let backend = echo_backend();
        let req = GenerationRequest::new(Role::Decompose, "list the things");
        let a = backend.generate(&req).unwrap();
        let b = backend.generate(&req).unwrap();
        assert_eq!(a.text, b.text);
        assert_eq!(a.prompt_tokens, b.prompt_tokens);
        assert_eq!(a.completion_tokens, b.completion_tokens);
    }

    #[test]
    fn missing_rule_yields_structured_refusal() {
        let backend = echo_backend();
        let response = backend
            .generate(&GenerationRequest::new(Role::Summarize, "hello"))
            .unwrap();
        assert!(response.text.contains("refusal"));
    }

    #[test]
    fn budget_ceiling_enforced() {
        let budget = TokenBudget::with_ceiling(3);
        let backend = echo_backend().with_budget(budget.clone());
        let req = GenerationRequest::new(Role::Decompose, "one two three four");
        match backend.generate(&req) {
            Err(BackendError::BudgetExceeded { ceiling: 3, .. }) => {}
            other => panic!("expected budget exceeded, got {other:?}"),
        }
        assert!(budget.used() > 3);
    }

    #[test]
    fn recording_backend_accumulates_calls() {
        let recorder = RecordingBackend::new(Arc::new(echo_backend()));
        let req = GenerationRequest::new(Role::Decompose, "alpha beta");
        recorder.generate(&req).unwrap();
        recorder.generate(&req).unwrap();
        assert_eq!(recorder.calls().len(), 2);
        let expected = recorder
            .calls()
            .iter()
            .map(|c| c.prompt_tokens + c.completion_tokens)
            .sum::<u64>();
        assert_eq!(recorder.total_tokens(), expected);
    }
}
