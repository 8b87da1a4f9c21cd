//! Public decomposition entry points: direct rule-engine use, the
//! backend-mediated path (token-accounted, re-validated), and the bounded
//! clarification session.

use crate::lexicon::Lexicon;
use crate::rules::{reformulate, rule_decompose, NluError, Outcome};
use crate::subgoal::{validate_plan, ClarificationRequest, Subgoal};
use kgqa_llm::{GenerationRequest, Role, RoleRule, TextBackend};
use serde::{Deserialize, Serialize};

pub const MAX_CLARIFICATION_ROUNDS: usize = 3;

/// JSON interchange form for decomposition results; the rule backend emits
/// this and any model backend must produce the same schema.
#[derive(Debug, Serialize, Deserialize)]
pub enum PlanJson {
    #[serde(rename = "plan")]
    Plan(Vec<Subgoal>),
    #[serde(rename = "clarify")]
    Clarify(ClarificationRequest),
}

pub fn outcome_to_json(outcome: &Outcome) -> String {
    let wire = match outcome {
        Outcome::Plan(plan) => PlanJson::Plan(plan.clone()),
        Outcome::Clarify(request) => PlanJson::Clarify(request.clone()),
    };
    serde_json::to_string(&wire).unwrap()
}

pub fn outcome_from_json(text: &str) -> Option<Outcome> {
    let wire: PlanJson = serde_json::from_str(text).ok()?;
    Some(match wire {
        PlanJson::Plan(plan) => Outcome::Plan(plan),
        PlanJson::Clarify(request) => Outcome::Clarify(request),
    })
}

/// Prompt for role=decompose. The question is recoverable from the prompt so
/// the rule backend can answer it.
pub fn decompose_prompt(question: &str) -> String {
    format!(
        "Decompose the question into an ordered subgoal plan. Respond with a \
         JSON object {{\"plan\": [...]}} or {{\"clarify\": {{...}}}}.\nquestion: {question}"
    )
}

pub fn question_from_prompt(prompt: &str) -> Option<&str> {
    prompt
        .rfind("question: ")
        .map(|idx| prompt[idx + "question: ".len()..].trim())
}

/// The decompose rule for a deterministic backend, capturing a lexicon.
pub fn decompose_rule(lexicon: Lexicon) -> RoleRule {
    Box::new(move |prompt: &str| {
        let Some(question) = question_from_prompt(prompt) else {
            return "{\"refusal\":\"prompt carries no question\"}".to_string();
        };
        match rule_decompose(question, &lexicon) {
            Ok(outcome) => outcome_to_json(&outcome),
            Err(e) => format!("{{\"refusal\":\"{e}\"}}"),
        }
    })
}

/// Decomposes through the configured backend (so tokens are accounted),
/// re-validating the returned plan. Any schema or invariant violation falls
/// back to the local rule engine.
pub fn decompose_with_backend(
    question: &str,
    lexicon: &Lexicon,
    backend: &dyn TextBackend,
) -> Result<Outcome, NluError> {
    if question.trim().is_empty() {
        return Err(NluError::EmptyQuestion);
    }
    let request = GenerationRequest::new(Role::Decompose, decompose_prompt(question));
    if let Ok(response) = backend.generate(&request) {
        if let Some(outcome) = outcome_from_json(&response.text) {
            let valid = match &outcome {
                Outcome::Plan(plan) => validate_plan(plan).is_ok(),
                Outcome::Clarify(request) => !request.candidates.is_empty(),
            };
            if valid {
                return Ok(outcome);
            }
        }
    }
    rule_decompose(question, lexicon)
}

/// Interactive clarification with a bounded number of rounds. Empty answers
/// keep the request open and still consume a round.
pub struct ClarificationSession {
    lexicon: Lexicon,
    original: String,
    request: ClarificationRequest,
    rounds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionOutcome {
    Plan {
        plan: Vec<Subgoal>,
        reformulated: String,
    },
    NeedMore(ClarificationRequest),
}

impl ClarificationSession {
    pub fn new(original: impl Into<String>, request: ClarificationRequest, lexicon: Lexicon) -> Self {
        ClarificationSession {
            lexicon,
            original: original.into(),
            request,
            rounds: 0,
        }
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn request(&self) -> &ClarificationRequest {
        &self.request
    }

    pub fn answer(&mut self, answer: &str) -> Result<SessionOutcome, NluError> {
        self.rounds += 1;
        if self.rounds > MAX_CLARIFICATION_ROUNDS {
            return Err(NluError::ClarificationLoopExceeded(MAX_CLARIFICATION_ROUNDS));
        }
        let answer = answer.trim();
        if answer.is_empty() {
            return Ok(SessionOutcome::NeedMore(self.request.clone()));
        }
        let reformulated = reformulate(&self.original, &self.request, answer);
        match rule_decompose(&reformulated, &self.lexicon)? {
            Outcome::Plan(plan) => Ok(SessionOutcome::Plan { plan, reformulated }),
            Outcome::Clarify(next) => {
                self.original = reformulated;
                self.request = next.clone();
                Ok(SessionOutcome::NeedMore(next))
            }
        }
    }
}

/// One-shot form of the session: applies a single clarification answer.
pub fn apply_clarification(
    original: &str,
    answer: &str,
    lexicon: &Lexicon,
) -> Result<Outcome, NluError> {
    match rule_decompose(original, lexicon)? {
        Outcome::Plan(plan) => Ok(Outcome::Plan(plan)),
        Outcome::Clarify(request) => {
            let reformulated = reformulate(original, &request, answer);
            rule_decompose(&reformulated, lexicon)
        }
    }
}
