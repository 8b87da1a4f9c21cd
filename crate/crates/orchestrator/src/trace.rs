//! Pipeline traces: every stage's decisions, repairs, verdicts and token
//! spend for one question, in pipeline order. The trace is the artifact
//! that makes a run inspectable after the fact.

use kgqa_llm::CallRecord;
use kgqa_nlu::{ClarificationRequest, Subgoal};
use serde_json::{json, Value};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct ClarificationTurn {
    pub request: ClarificationRequest,
    pub answer: Option<String>,
}

#[derive(Debug, Clone)]
pub struct QueryAttempt {
    pub query_text: String,
    pub repairs: Value,
    pub verification: Option<Value>,
    pub executed_rows: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct AttemptTrace {
    pub graph_id: String,
    pub allocation: Value,
    pub queries: Vec<QueryAttempt>,
    pub outcome: String,
}

#[derive(Debug, Clone)]
pub struct SubgoalTrace {
    pub subgoal_id: usize,
    pub attempts: Vec<AttemptTrace>,
    pub outcome: String,
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct TokenAccounting {
    pub calls: Vec<CallRecord>,
}

impl TokenAccounting {
    pub fn total(&self) -> u64 {
        self.calls
            .iter()
            .map(|c| c.prompt_tokens + c.completion_tokens)
            .sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct PipelineTrace {
    pub question: String,
    pub clarification: Vec<ClarificationTurn>,
    pub plan: Vec<Subgoal>,
    pub subgoals: Vec<SubgoalTrace>,
    pub consensus: Option<Value>,
    pub tokens: TokenAccounting,
    /// Wall-clock per stage, in microseconds.
    pub stage_micros: BTreeMap<String, u128>,
}

impl PipelineTrace {
    pub fn to_json(&self) -> Value {
        json!({
            "question": self.question,
            "clarification": self.clarification.iter().map(|turn| json!({
                "request": {
                    "question": turn.request.question,
                    "kind": turn.request.kind,
                    "candidates": turn.request.candidates,
                    "mention": turn.request.mention,
                },
                "answer": turn.answer,
            })).collect::<Vec<_>>(),
            "plan": self.plan,
            "subgoals": self.subgoals.iter().map(|s| json!({
                "subgoal_id": s.subgoal_id,
                "attempts": s.attempts.iter().map(|a| json!({
                    "graph_id": a.graph_id,
                    "allocation": a.allocation,
                    "queries": a.queries.iter().map(|q| json!({
                        "query": q.query_text,
                        "repairs": q.repairs,
                        "verification": q.verification,
                        "executed_rows": q.executed_rows,
                        "error": q.error,
                    })).collect::<Vec<_>>(),
                    "outcome": a.outcome,
                })).collect::<Vec<_>>(),
                "outcome": s.outcome,
                "skip_reason": s.skip_reason,
            })).collect::<Vec<_>>(),
            "consensus": self.consensus,
            "tokens": {
                "calls": self.tokens.calls,
                "total": self.tokens.total(),
            },
            "stage_micros": self.stage_micros,
        })
    }

    /// The trace with timing fields zeroed, for output comparisons across
    /// parallelism widths.
    pub fn normalized_json(&self) -> Value {
        let mut value = self.to_json();
        if let Some(obj) = value.as_object_mut() {
            obj.insert("stage_micros".into(), json!({}));
        }
        value
    }

    /// Total structural predicate repairs across every attempt, as reported
    /// by the repair logs embedded in the trace.
    pub fn structural_predicate_repairs(&self) -> usize {
        let mut count = 0;
        for subgoal in &self.subgoals {
            for attempt in &subgoal.attempts {
                for query in &attempt.queries {
                    if let Some(entries) = query.repairs.get("entries").and_then(Value::as_array) {
                        count += entries
                            .iter()
                            .filter(|e| {
                                e.get("severity").and_then(Value::as_str) == Some("structural")
                                    && matches!(
                                        e.get("rule").and_then(Value::as_str),
                                        Some("unknown-predicate") | Some("unused-predicate")
                                    )
                            })
                            .count();
                    }
                }
            }
        }
        count
    }
}
