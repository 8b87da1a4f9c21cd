//! Subgoal plans and clarification requests.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    EntityLookup,
    ConditionFilter,
    Aggregation,
    Comparison,
    CoOccurrence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintOp {
    Eq,
    Ne,
    Gt,
    Ge,
    Lt,
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiteralConstraint {
    pub mention: String,
    pub op: ConstraintOp,
}

/// One reasoning operation of a plan. Ids are consecutive from 1 and
/// `depends_on` always points strictly backward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgoal {
    pub id: usize,
    pub intent: Intent,
    #[serde(default)]
    pub entity_mentions: Vec<String>,
    #[serde(default)]
    pub predicate_mentions: Vec<String>,
    #[serde(default)]
    pub literal_constraints: Vec<LiteralConstraint>,
    #[serde(default)]
    pub depends_on: Option<usize>,
    /// Superlative direction for Comparison subgoals: true = largest first.
    #[serde(default)]
    pub descending: bool,
}

impl Subgoal {
    pub fn new(id: usize, intent: Intent) -> Self {
        Subgoal {
            id,
            intent,
            entity_mentions: Vec::new(),
            predicate_mentions: Vec::new(),
            literal_constraints: Vec::new(),
            depends_on: None,
            descending: true,
        }
    }

    /// The flat text of every mention, used as retrieval query text.
    pub fn mention_text(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        parts.extend(self.predicate_mentions.iter().map(String::as_str));
        parts.extend(self.entity_mentions.iter().map(String::as_str));
        parts.join(" ")
    }

    /// Mentions in grounding order: predicates first, then entities.
    pub fn all_mentions(&self) -> Vec<&str> {
        self.predicate_mentions
            .iter()
            .chain(self.entity_mentions.iter())
            .map(String::as_str)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbiguityKind {
    UnderspecifiedEntity,
    AmbiguousIntent,
    MissingConstraint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarificationRequest {
    pub question: String,
    pub kind: AmbiguityKind,
    /// At least one candidate reading, in lexicon order.
    pub candidates: Vec<String>,
    /// The mention that triggered the request; clarification answers
    /// substitute for this span when re-parsing.
    pub mention: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("subgoal ids must be consecutive from 1 (found {0} at position {1})")]
    NonConsecutiveIds(usize, usize),
    #[error("subgoal {0} depends on {1}, which is not an earlier subgoal")]
    BadDependency(usize, usize),
    #[error("subgoal {0} has neither entity nor predicate mentions")]
    NoMentions(usize),
    #[error("plan is empty")]
    Empty,
}

/// Checks the plan invariants: consecutive ids, backward-only dependencies,
/// at least one mention per subgoal.
pub fn validate_plan(plan: &[Subgoal]) -> Result<(), PlanError> {
    if plan.is_empty() {
        return Err(PlanError::Empty);
    }
    for (position, subgoal) in plan.iter().enumerate() {
        if subgoal.id != position + 1 {
            return Err(PlanError::NonConsecutiveIds(subgoal.id, position));
        }
        if let Some(dep) = subgoal.depends_on {
            if dep == 0 || dep >= subgoal.id {
                return Err(PlanError::BadDependency(subgoal.id, dep));
            }
        }
        if subgoal.entity_mentions.is_empty() && subgoal.predicate_mentions.is_empty() {
            return Err(PlanError::NoMentions(subgoal.id));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_forward_dependencies() {
        let mut g1 = Subgoal::new(1, Intent::EntityLookup);
        g1.entity_mentions.push("x".into());
        g1.depends_on = Some(1);
        assert!(matches!(
            validate_plan(&[g1]),
            Err(PlanError::BadDependency(1, 1))
        ));
    }

    #[test]
    fn validate_rejects_gap_in_ids() {
        let mut g = Subgoal::new(2, Intent::EntityLookup);
        g.entity_mentions.push("x".into());
        assert!(matches!(
            validate_plan(&[g]),
            Err(PlanError::NonConsecutiveIds(2, 0))
        ));
    }

    #[test]
    fn validate_requires_mentions() {
        let g = Subgoal::new(1, Intent::EntityLookup);
        assert!(matches!(validate_plan(&[g]), Err(PlanError::NoMentions(1))));
    }
}
