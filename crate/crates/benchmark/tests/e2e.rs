//! End-to-end pipeline runs over the generated fixtures.

use kgqa_benchmark::{load_corpus, make_fixtures, run_item, DEFAULT_SEED};
use kgqa_orchestrator::{Clarifier, Pipeline, PipelineConfig, PipelineError};
use std::path::PathBuf;
use std::sync::OnceLock;

/// Fixtures generated once per test binary.
fn fixture_dir() -> &'static PathBuf {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = std::env::temp_dir().join(format!("kgqa-e2e-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        make_fixtures(&dir, DEFAULT_SEED).unwrap();
        dir
    })
}

fn pipeline() -> Pipeline {
    let config = PipelineConfig {
        registry_path: fixture_dir().join("registry.json"),
        ..Default::default()
    };
    Pipeline::from_config(config).unwrap()
}

#[test]
fn single_lookup_answers_end_to_end() {
    let pipeline = pipeline();
    let (consensus, trace) = pipeline
        .answer_question(
            "Which resources have the CPA code 011150?",
            Clarifier::FailFast,
        )
        .unwrap();
    assert_eq!(consensus.rows.len(), 1);
    assert!(consensus.rows[0]
        .values()
        .any(|t| t.lexical_form().contains("cpa-011150")));
    assert_eq!(trace.plan.len(), 1);
    assert_eq!(trace.subgoals.len(), 1);
}

#[test]
fn ambiguous_question_fails_fast_with_request() {
    let pipeline = pipeline();
    let err = pipeline
        .answer_question(
            "For product code found in the resources, which trade codes co-occur with it?",
            Clarifier::FailFast,
        )
        .unwrap_err();
    match err {
        PipelineError::ClarificationNeeded(request) => {
            assert!(!request.candidates.is_empty());
        }
        other => panic!("expected clarification, got {other}"),
    }
}

#[test]
fn clarified_mapping_links_both_codes_with_one_repair() {
    let pipeline = pipeline();
    let canned = vec!["CPA code 011150".to_string()];
    let (consensus, trace) = pipeline
        .answer_question(
            "For product code found in the resources, which trade codes co-occur with it?",
            Clarifier::Canned(&canned),
        )
        .unwrap();
    assert!(consensus.answer_text.contains("100610"), "{}", consensus.answer_text);
    assert!(consensus.answer_text.contains("011150"), "{}", consensus.answer_text);
    assert!(consensus.answer_text.contains("flow-ledger"));
    assert!(consensus.answer_text.contains("waste-catalog"));
    assert_eq!(trace.clarification.len(), 1);
    assert_eq!(trace.plan.len(), 2);
    assert_eq!(
        trace.structural_predicate_repairs(),
        1,
        "exactly one faulty-predicate repair expected: {}",
        serde_json::to_string_pretty(&trace.to_json()).unwrap()
    );
}

#[test]
fn unanswerable_question_fails_with_per_graph_reports() {
    let pipeline = pipeline();
    // Syntactically fine, semantically empty everywhere: no flow reaches
    // this quantity, so verification fails on every candidate graph.
    let err = pipeline
        .answer_question(
            "Which flows have a quantity greater than 999999?",
            Clarifier::FailFast,
        )
        .unwrap_err();
    match err {
        PipelineError::AllSubgoalsFailed { trace } => {
            let attempts = &trace.subgoals[0].attempts;
            assert!(attempts.len() >= 2, "fallback tried alternate graphs");
            for attempt in attempts {
                assert!(
                    attempt.outcome.contains("failed") || attempt.outcome.contains("verification"),
                    "{}",
                    attempt.outcome
                );
            }
            assert!(trace.subgoals[0].skip_reason.is_some());
        }
        other => panic!("expected all-subgoals-failed, got {other}"),
    }
}

#[test]
fn corpus_items_run_green() {
    let pipeline = pipeline();
    let corpus = load_corpus(&fixture_dir().join("corpus.jsonl")).unwrap();
    let mut failures = Vec::new();
    for item in &corpus {
        let record = run_item(&pipeline, item);
        if record.ea != 1 {
            failures.push(format!("{}: {:?}", item.id, record.error));
        }
    }
    assert!(
        failures.is_empty(),
        "{} of {} items failed:\n{}",
        failures.len(),
        corpus.len(),
        failures.join("\n")
    );
}
