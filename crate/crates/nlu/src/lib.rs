//! Compositional subgoal parsing: questions decompose into ordered subgoals
//! with intent labels, entity/predicate mentions and literal constraints;
//! ambiguous questions yield clarification requests instead.
//!
//! The engine applies, in order, interrogative-head patterns, a configurable
//! domain lexicon, and conjunction splitting. It is a pure function of the
//! question and lexicon; the pattern inventory is versioned with this crate.

pub mod decompose;
pub mod lexicon;
pub mod rules;
pub mod subgoal;

pub use decompose::{
    apply_clarification, decompose_prompt, decompose_rule, decompose_with_backend,
    outcome_from_json, outcome_to_json, question_from_prompt, ClarificationSession,
    SessionOutcome, MAX_CLARIFICATION_ROUNDS,
};
pub use lexicon::{default_lexicon, Lexicon, LexiconEntry, LexiconKind, DEFAULT_LEXICON_JSON};
pub use rules::{reformulate, rule_decompose, NluError, Outcome};
pub use subgoal::{
    validate_plan, AmbiguityKind, ClarificationRequest, ConstraintOp, Intent, LiteralConstraint,
    PlanError, Subgoal,
};

#[cfg(test)]
mod tests {
    use super::*;

    fn decompose(q: &str) -> Outcome {
        rule_decompose(q, &default_lexicon()).unwrap()
    }

    fn plan(q: &str) -> Vec<Subgoal> {
        match decompose(q) {
            Outcome::Plan(p) => p,
            Outcome::Clarify(c) => panic!("unexpected clarification: {c:?}"),
        }
    }

    #[test]
    fn empty_question_is_an_error() {
        assert_eq!(
            rule_decompose("  ", &default_lexicon()).unwrap_err(),
            NluError::EmptyQuestion
        );
    }

    #[test]
    fn ambiguous_product_code_requests_clarification() {
        let outcome =
            decompose("For product code found in the resources, which trade codes co-occur with it?");
        match outcome {
            Outcome::Clarify(request) => {
                assert_eq!(request.kind, AmbiguityKind::UnderspecifiedEntity);
                assert!(request
                    .candidates
                    .iter()
                    .any(|c| c.contains("waste classification")));
                assert_eq!(request.mention.as_deref(), Some("product code"));
            }
            other => panic!("expected clarification, got {other:?}"),
        }
    }

    /// Golden trace: the clarified co-occurrence question decomposes into an
    /// entity lookup followed by a dependent co-occurrence subgoal.
    #[test]
    fn clarified_cooccurrence_two_subgoal_plan() {
        let plan = plan("Which trade codes co-occur with CPA code 011150?");
        assert_eq!(plan.len(), 2);
        assert_eq!(plan[0].intent, Intent::EntityLookup);
        assert_eq!(plan[0].entity_mentions, vec!["CPA code 011150"]);
        assert_eq!(
            plan[0].literal_constraints,
            vec![LiteralConstraint {
                mention: "011150".into(),
                op: ConstraintOp::Eq
            }]
        );
        assert_eq!(plan[1].intent, Intent::CoOccurrence);
        assert_eq!(plan[1].predicate_mentions, vec!["trade codes"]);
        assert_eq!(plan[1].depends_on, Some(1));
    }

    /// Golden trace: simple aggregation.
    #[test]
    fn aggregation_single_subgoal() {
        let plan = plan("How many actors are in the industry registry?");
        assert_eq!(plan.len(), 1);
        assert_eq!(plan[0].intent, Intent::Aggregation);
        assert_eq!(plan[0].predicate_mentions, vec!["actors"]);
        assert_eq!(plan[0].entity_mentions, vec!["industry registry"]);
    }

    #[test]
    fn comparator_becomes_condition_filter() {
        let plan = plan("Which flows have a quantity greater than 100?");
        assert_eq!(plan[0].intent, Intent::ConditionFilter);
        assert_eq!(plan[0].predicate_mentions, vec!["quantity"]);
        assert_eq!(
            plan[0].literal_constraints[0],
            LiteralConstraint {
                mention: "100".into(),
                op: ConstraintOp::Gt
            }
        );
    }

    #[test]
    fn superlative_becomes_comparison() {
        let highest = plan("Which flow has the highest quantity?");
        assert_eq!(highest[0].intent, Intent::Comparison);
        assert!(highest[0].descending);
        let lowest = plan("Which flow has the lowest quantity?");
        assert!(!lowest[0].descending);
    }

    #[test]
    fn object_lookup_pattern() {
        let plan = plan("What is the quantity of the flow with HS code 100610?");
        assert_eq!(plan[0].intent, Intent::EntityLookup);
        assert_eq!(plan[0].predicate_mentions, vec!["quantity"]);
        assert!(plan[0].entity_mentions.contains(&"HS code 100610".to_string()));
        assert_eq!(plan[0].literal_constraints[0].mention, "100610");
    }

    #[test]
    fn conjunction_splits_into_independent_subgoals() {
        let plan = plan(
            "How many actors are in the industry registry and how many flows are in the flow ledger?",
        );
        assert_eq!(plan.len(), 2);
        assert_eq!(plan[0].id, 1);
        assert_eq!(plan[1].id, 2);
        assert!(plan.iter().all(|g| g.depends_on.is_none()));
    }

    #[test]
    fn unmatched_intent_requests_clarification() {
        match decompose("Tell me everything you know about rice.") {
            Outcome::Clarify(request) => {
                assert_eq!(request.kind, AmbiguityKind::AmbiguousIntent);
                assert!(!request.candidates.is_empty());
            }
            other => panic!("expected clarification, got {other:?}"),
        }
    }

    #[test]
    fn mentions_appear_verbatim_case_folded() {
        for question in [
            "Which trade codes co-occur with CPA code 011150?",
            "How many actors are in the industry registry?",
            "Which flows have a quantity greater than 100?",
            "What is the quantity of the flow with HS code 100610?",
        ] {
            if let Outcome::Plan(plan) = decompose(question) {
                let folded = question.to_lowercase();
                for g in &plan {
                    for mention in g.all_mentions() {
                        assert!(
                            folded.contains(&mention.to_lowercase()),
                            "mention `{mention}` not in question `{question}`"
                        );
                    }
                }
            } else {
                panic!("expected plan for {question}");
            }
        }
    }

    #[test]
    fn determinism_of_decompose() {
        let q = "Which trade codes co-occur with CPA code 011150?";
        assert_eq!(decompose(q), decompose(q));
    }

    #[test]
    fn clarification_applies_reading() {
        let original = "For product code found in the resources, which trade codes co-occur with it?";
        let outcome = apply_clarification(original, "CPA code 011150", &default_lexicon()).unwrap();
        match outcome {
            Outcome::Plan(plan) => {
                assert_eq!(plan.len(), 2);
                assert_eq!(plan[0].intent, Intent::EntityLookup);
                assert!(plan[0].entity_mentions[0].contains("CPA code 011150"));
                assert_eq!(plan[0].literal_constraints[0].mention, "011150");
                assert_eq!(plan[1].depends_on, Some(1));
            }
            other => panic!("expected plan, got {other:?}"),
        }
    }

    #[test]
    fn clarification_with_reading_phrase() {
        let original = "For product code found in the resources, which trade codes co-occur with it?";
        let outcome =
            apply_clarification(original, "waste classification codes", &default_lexicon())
                .unwrap();
        match outcome {
            Outcome::Plan(plan) => {
                assert_eq!(plan.len(), 2);
                assert!(plan[0].entity_mentions[0].contains("waste classification codes"));
            }
            other => panic!("expected plan, got {other:?}"),
        }
    }

    #[test]
    fn session_counts_rounds_and_caps_at_three() {
        let original = "For product code found in the resources, which trade codes co-occur with it?";
        let lexicon = default_lexicon();
        let Outcome::Clarify(request) = rule_decompose(original, &lexicon).unwrap() else {
            panic!("expected clarification");
        };
        let mut session = ClarificationSession::new(original, request, lexicon);
        // Empty answer keeps the request open and consumes a round.
        assert!(matches!(
            session.answer("").unwrap(),
            SessionOutcome::NeedMore(_)
        ));
        assert_eq!(session.rounds(), 1);
        // An answer that is itself ambiguous raises a second request.
        assert!(matches!(
            session.answer("mixed product code").unwrap(),
            SessionOutcome::NeedMore(_)
        ));
        assert_eq!(session.rounds(), 2);
        assert!(matches!(session.answer("").unwrap(), SessionOutcome::NeedMore(_)));
        assert_eq!(
            session.answer("").unwrap_err(),
            NluError::ClarificationLoopExceeded(3)
        );
    }

    #[test]
    fn backend_path_produces_same_plan_as_rules() {
        use kgqa_llm::{Role, RuleBackend};
        let lexicon = default_lexicon();
        let backend = RuleBackend::new().register(Role::Decompose, decompose_rule(lexicon.clone()));
        let question = "Which trade codes co-occur with CPA code 011150?";
        let via_backend = decompose_with_backend(question, &lexicon, &backend).unwrap();
        let via_rules = rule_decompose(question, &lexicon).unwrap();
        assert_eq!(via_backend, via_rules);
    }

    #[test]
    fn invalid_backend_output_falls_back_to_rules() {
        use kgqa_llm::{Role, RuleBackend};
        let lexicon = default_lexicon();
        let backend =
            RuleBackend::new().register(Role::Decompose, Box::new(|_: &str| "garbage".into()));
        let question = "How many actors are in the industry registry?";
        let outcome = decompose_with_backend(question, &lexicon, &backend).unwrap();
        assert_eq!(outcome, rule_decompose(question, &lexicon).unwrap());
    }
}
