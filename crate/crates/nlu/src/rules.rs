//! The decomposition rule engine: interrogative-head patterns first, then
//! lexicon lookups, then conjunction splitting. Pure and deterministic.

use crate::lexicon::Lexicon;
use crate::subgoal::{
    validate_plan, AmbiguityKind, ClarificationRequest, ConstraintOp, Intent, LiteralConstraint,
    PlanError, Subgoal,
};
use regex::Regex;
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Plan(Vec<Subgoal>),
    Clarify(ClarificationRequest),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NluError {
    #[error("question is empty")]
    EmptyQuestion,
    #[error("clarification did not converge after {0} rounds")]
    ClarificationLoopExceeded(usize),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

macro_rules! pattern {
    ($name:ident, $re:literal) => {
        fn $name() -> &'static Regex {
            static RE: OnceLock<Regex> = OnceLock::new();
            RE.get_or_init(|| Regex::new($re).unwrap())
        }
    };
}

pattern!(
    adjunct_cooccur,
    r"(?i)^for (?:the )?(?P<ent>.+?) found in (?:the )?(?P<src>.+?)\s*,\s*which (?P<pred>.+?) co-?occurs? with (?:it|them)$"
);
pattern!(
    cooccur,
    r"(?i)^which (?P<pred>.+?) co-?occurs? with (?:the )?(?P<ent>.+)$"
);
pattern!(how_many_per, r"(?i)^how many (?P<cls>.+?) per (?P<pred>.+)$");
pattern!(
    how_many_in,
    r"(?i)^how many (?P<cls>.+?) (?:are|is) (?:there )?(?:in|on|at) (?:the )?(?P<loc>.+)$"
);
pattern!(how_many, r"(?i)^how many (?P<cls>.+?) (?:are there|exist)$");
pattern!(
    superlative,
    r"(?i)^which (?P<cls>.+?) has the (?P<dir>highest|largest|most|greatest|biggest|lowest|smallest|least) (?P<pred>.+)$"
);
pattern!(
    comparator,
    r"(?i)^which (?P<cls>.+?) (?:have|has) (?:a |an |the )?(?P<pred>.+?) (?P<op>greater than|more than|over|above|at least|less than|fewer than|under|below|at most|exactly) (?P<val>\S+)$"
);
pattern!(
    what_of,
    r"(?i)^what (?:is|are) the (?P<proj>.+?) of the (?P<cls>.+?) (?:with|whose) (?:the )?(?P<ent>.+)$"
);
pattern!(
    which_have,
    r"(?i)^(?:which|what|who) (?P<cls>.+?) (?:have|has|carry|carries|hold|holds) (?:a |an |the )?(?P<ent>.+)$"
);
pattern!(
    conjunction_head,
    r"(?i)\s+and\s+(which |how many |what |who )"
);

/// Splits a question into clauses at `and` boundaries that start a new
/// interrogative clause; other `and`s stay inside their clause.
fn split_clauses(question: &str) -> Vec<&str> {
    let mut clauses = Vec::new();
    let mut start = 0;
    for m in conjunction_head().captures_iter(question) {
        let whole = m.get(0).unwrap();
        let head = m.get(1).unwrap();
        clauses.push(question[start..whole.start()].trim());
        start = head.start();
    }
    clauses.push(question[start..].trim());
    clauses.into_iter().filter(|c| !c.is_empty()).collect()
}

/// A trailing code-like token ("011150", "0201rec", "RC-1007") becomes an
/// equality constraint; the mention itself stays intact. Code tokens carry
/// at least one digit and only alphanumerics, dots and dashes.
fn trailing_literal(mention: &str) -> Option<String> {
    let token = mention.split_whitespace().last()?;
    let token = token.trim_matches(|c: char| !c.is_alphanumeric() && c != '.' && c != '-');
    if token.is_empty() {
        return None;
    }
    let code_like = token.chars().any(|c| c.is_ascii_digit())
        && token
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '-');
    if code_like {
        Some(token.to_string())
    } else {
        None
    }
}

fn comparator_op(op_text: &str) -> ConstraintOp {
    match op_text.to_ascii_lowercase().as_str() {
        "greater than" | "more than" | "over" | "above" => ConstraintOp::Gt,
        "at least" => ConstraintOp::Ge,
        "less than" | "fewer than" | "under" | "below" => ConstraintOp::Lt,
        "at most" => ConstraintOp::Le,
        _ => ConstraintOp::Eq,
    }
}

/// Decomposes one clause into subgoals, numbered from `next_id`.
fn parse_clause(clause: &str, next_id: usize) -> Option<Vec<Subgoal>> {
    if let Some(caps) = adjunct_cooccur().captures(clause) {
        let ent = caps["ent"].to_string();
        let src = caps["src"].to_string();
        let pred = caps["pred"].to_string();
        let mut g1 = Subgoal::new(next_id, Intent::EntityLookup);
        if let Some(lit) = trailing_literal(&ent) {
            g1.literal_constraints.push(LiteralConstraint {
                mention: lit,
                op: ConstraintOp::Eq,
            });
        }
        g1.entity_mentions = vec![ent, src];
        let mut g2 = Subgoal::new(next_id + 1, Intent::CoOccurrence);
        g2.predicate_mentions = vec![pred];
        g2.depends_on = Some(next_id);
        return Some(vec![g1, g2]);
    }
    if let Some(caps) = cooccur().captures(clause) {
        let mut g1 = Subgoal::new(next_id, Intent::EntityLookup);
        let ent = caps["ent"].to_string();
        if let Some(lit) = trailing_literal(&ent) {
            g1.literal_constraints.push(LiteralConstraint {
                mention: lit,
                op: ConstraintOp::Eq,
            });
        }
        g1.entity_mentions = vec![ent];
        let mut g2 = Subgoal::new(next_id + 1, Intent::CoOccurrence);
        g2.predicate_mentions = vec![caps["pred"].to_string()];
        g2.depends_on = Some(next_id);
        return Some(vec![g1, g2]);
    }
    if let Some(caps) = how_many_per().captures(clause) {
        let mut g = Subgoal::new(next_id, Intent::Aggregation);
        g.predicate_mentions = vec![caps["cls"].to_string(), caps["pred"].to_string()];
        return Some(vec![g]);
    }
    if let Some(caps) = how_many_in().captures(clause) {
        let mut g = Subgoal::new(next_id, Intent::Aggregation);
        g.predicate_mentions = vec![caps["cls"].to_string()];
        g.entity_mentions = vec![caps["loc"].to_string()];
        return Some(vec![g]);
    }
    if let Some(caps) = how_many().captures(clause) {
        let mut g = Subgoal::new(next_id, Intent::Aggregation);
        g.predicate_mentions = vec![caps["cls"].to_string()];
        return Some(vec![g]);
    }
    if let Some(caps) = superlative().captures(clause) {
        let mut g = Subgoal::new(next_id, Intent::Comparison);
        g.predicate_mentions = vec![caps["pred"].to_string()];
        g.entity_mentions = vec![caps["cls"].to_string()];
        g.descending = matches!(
            caps["dir"].to_ascii_lowercase().as_str(),
            "highest" | "largest" | "most" | "greatest" | "biggest"
        );
        return Some(vec![g]);
    }
    if let Some(caps) = comparator().captures(clause) {
        let mut g = Subgoal::new(next_id, Intent::ConditionFilter);
        g.predicate_mentions = vec![caps["pred"].to_string()];
        g.entity_mentions = vec![caps["cls"].to_string()];
        g.literal_constraints.push(LiteralConstraint {
            mention: caps["val"].trim_end_matches(['?', '.', ',']).to_string(),
            op: comparator_op(&caps["op"]),
        });
        return Some(vec![g]);
    }
    if let Some(caps) = what_of().captures(clause) {
        let ent = caps["ent"].to_string();
        let mut g = Subgoal::new(next_id, Intent::EntityLookup);
        if let Some(lit) = trailing_literal(&ent) {
            g.literal_constraints.push(LiteralConstraint {
                mention: lit,
                op: ConstraintOp::Eq,
            });
        }
        g.predicate_mentions = vec![caps["proj"].to_string()];
        g.entity_mentions = vec![caps["cls"].to_string(), ent];
        return Some(vec![g]);
    }
    if let Some(caps) = which_have().captures(clause) {
        let ent = caps["ent"].to_string();
        let mut g = Subgoal::new(next_id, Intent::EntityLookup);
        if let Some(lit) = trailing_literal(&ent) {
            g.literal_constraints.push(LiteralConstraint {
                mention: lit,
                op: ConstraintOp::Eq,
            });
        }
        g.entity_mentions = vec![caps["cls"].to_string(), ent];
        return Some(vec![g]);
    }
    None
}

/// Locates the question span matching a lexicon surface (allowing a plural
/// `s`), for clarification substitution.
fn surface_span(question: &str, surface: &str) -> Option<String> {
    let tokens: Vec<&str> = surface.split_whitespace().collect();
    if tokens.is_empty() {
        return None;
    }
    let escaped: Vec<String> = tokens.iter().map(|t| regex::escape(t)).collect();
    let pattern = format!(r"(?i)\b{}(?:e?s)?\b", escaped.join(r"\s+"));
    let re = Regex::new(&pattern).ok()?;
    re.find(question).map(|m| m.as_str().to_string())
}

const INTENT_SUGGESTIONS: &[&str] = &[
    "Which <things> have <property> <value>?",
    "How many <things> are in <graph>?",
    "Which <things> have <property> greater than <number>?",
    "Which <thing> has the highest <property>?",
    "What is the <property> of the <thing> with <property> <value>?",
    "Which <codes> co-occur with <code> <value>?",
];

/// The rule-based decomposer. Returns a subgoal plan or a clarification
/// request; deterministic for a fixed lexicon.
pub fn rule_decompose(question: &str, lexicon: &Lexicon) -> Result<Outcome, NluError> {
    let trimmed = question.trim();
    if trimmed.is_empty() {
        return Err(NluError::EmptyQuestion);
    }
    let stripped = trimmed.trim_end_matches(['?', '.', '!', ' ']);

    let mut plan: Vec<Subgoal> = Vec::new();
    for clause in split_clauses(stripped) {
        match parse_clause(clause, plan.len() + 1) {
            Some(subgoals) => plan.extend(subgoals),
            None => {
                return Ok(Outcome::Clarify(ClarificationRequest {
                    question: trimmed.to_string(),
                    kind: AmbiguityKind::AmbiguousIntent,
                    candidates: INTENT_SUGGESTIONS.iter().map(|s| s.to_string()).collect(),
                    mention: None,
                }));
            }
        }
    }

    // Constraint sanity: a comparison operator needs a numeric bound.
    for subgoal in &plan {
        if subgoal.intent == Intent::ConditionFilter {
            for constraint in &subgoal.literal_constraints {
                let numeric = constraint.mention.parse::<f64>().is_ok();
                if !numeric {
                    return Ok(Outcome::Clarify(ClarificationRequest {
                        question: trimmed.to_string(),
                        kind: AmbiguityKind::MissingConstraint,
                        candidates: vec![format!(
                            "a numeric bound instead of `{}`",
                            constraint.mention
                        )],
                        mention: Some(constraint.mention.clone()),
                    }));
                }
            }
        }
    }

    // Lexicon ambiguity: one mention resolving to two different targets.
    for subgoal in &plan {
        for mention in subgoal.all_mentions() {
            if let Some((surface, entries)) = lexicon.ambiguity_in(mention) {
                let mut candidates: Vec<String> = Vec::new();
                for entry in &entries {
                    let reading = entry.reading.clone().unwrap_or_else(|| entry.hint.clone());
                    if !candidates.contains(&reading) {
                        candidates.push(reading);
                    }
                }
                let span = surface_span(trimmed, &surface)
                    .or_else(|| Some(mention.to_string()));
                return Ok(Outcome::Clarify(ClarificationRequest {
                    question: trimmed.to_string(),
                    kind: AmbiguityKind::UnderspecifiedEntity,
                    candidates,
                    mention: span,
                }));
            }
        }
    }

    validate_plan(&plan)?;
    Ok(Outcome::Plan(plan))
}

/// Reformulates the question by substituting the clarified reading for the
/// ambiguous span, then re-parses.
pub fn reformulate(original: &str, request: &ClarificationRequest, answer: &str) -> String {
    match &request.mention {
        Some(span) => {
            // Case-insensitive single replacement of the recorded span.
            if let Some(idx) = original.to_lowercase().find(&span.to_lowercase()) {
                let mut out = String::new();
                out.push_str(&original[..idx]);
                out.push_str(answer);
                out.push_str(&original[idx + span.len()..]);
                return out;
            }
            original.to_string()
        }
        // No span to substitute: the answer replaces the question wholesale.
        None => answer.to_string(),
    }
}
