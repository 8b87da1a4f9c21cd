//! Dual-stage consistency checking, the gatekeeper before execution.
//!
//! Stage 1 (symbolic): parse/serialize round-trip, predicate existence,
//! domain/range compatibility, and a LIMIT-1 preliminary execution that must
//! return something. Stage 2 (counterfactual): constants are perturbed to
//! guaranteed-foreign terms; a query whose results never change is flagged
//! as underspecified. Only queries passing both stages are forwarded.

pub mod perturb;

pub use perturb::{
    apply_perturbation, fresh_term, gen_perturbations, NoPerturbableSite, Perturbation,
    PerturbationKind, Replacement, Site,
};

use kgqa_exec::{AnswerSet, QueryExecutor};
use kgqa_rdf::{vocab, SchemaSlice, Term};
use kgqa_sparql::{parse_sparql, serialize_sparql, PatternTerm, SparqlQuery};
use kgqa_synthesizer::{nearest_predicate, REPAIR_JACCARD_THRESHOLD};
use serde::Serialize;

pub const DEFAULT_PERTURBATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    Syntax,
    PredicateExistence,
    TypeCompatibility,
    NonemptyPreliminary,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: CheckId,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    FailSymbolic,
    FailUnderspecified,
}

#[derive(Debug, Clone, Serialize)]
pub struct Stage2Result {
    pub descriptor: String,
    pub changed: bool,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub query: SparqlQuery,
    pub graph_id: String,
    pub stage1: Vec<CheckResult>,
    pub stage2: Vec<Stage2Result>,
    pub verdict: Verdict,
    pub suggested_revision: Option<SparqlQuery>,
    /// Set when a stage-2 execution failed; the verdict is FailSymbolic.
    pub execution_failure: Option<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed_check(&self) -> Option<&CheckResult> {
        self.stage1.iter().find(|c| !c.passed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "query": serialize_sparql(&self.query),
            "graph_id": self.graph_id,
            "stage1": self.stage1,
            "stage2": self.stage2,
            "verdict": self.verdict,
            "suggested_revision": self.suggested_revision.as_ref().map(serialize_sparql),
            "execution_failure": self.execution_failure,
        })
    }
}

/// Stage 1: the four symbolic checks, in order. Failures are data, not
/// errors; executor problems surface as a failed preliminary check.
pub fn verify_symbolic(
    query: &SparqlQuery,
    slice: &SchemaSlice,
    executor: &dyn QueryExecutor,
) -> Vec<CheckResult> {
    let mut results = Vec::with_capacity(4);

    // Check 1: parse/serialize round-trip.
    let rendered = serialize_sparql(query);
    let syntax = match parse_sparql(&rendered) {
        Ok(reparsed) if reparsed == *query => CheckResult {
            check: CheckId::Syntax,
            passed: true,
            detail: "round-trip stable".into(),
        },
        Ok(_) => CheckResult {
            check: CheckId::Syntax,
            passed: false,
            detail: "round-trip changed the query structure".into(),
        },
        Err(e) => CheckResult {
            check: CheckId::Syntax,
            passed: false,
            detail: e.to_string(),
        },
    };
    results.push(syntax);

    // Check 2: every constant predicate exists in the schema slice.
    let missing: Vec<&str> = query
        .constant_predicates()
        .into_iter()
        .filter(|p| !slice.has_predicate(p))
        .collect();
    results.push(CheckResult {
        check: CheckId::PredicateExistence,
        passed: missing.is_empty(),
        detail: if missing.is_empty() {
            "all predicates known".into()
        } else {
            format!("unknown predicates: {}", missing.join(", "))
        },
    });

    // Check 3: domain/range compatibility. Declared constraints hard-fail;
    // observed-only constraints warn in the detail but pass.
    results.push(type_compatibility(query, slice));

    // Check 4: preliminary execution with LIMIT 1 must return something.
    let mut probe = query.clone();
    probe.limit = Some(1);
    let nonempty = match executor.execute(&probe) {
        Ok(answers) => {
            if answers.rows.is_empty() {
                CheckResult {
                    check: CheckId::NonemptyPreliminary,
                    passed: false,
                    detail: "empty answer set under current graph conditions".into(),
                }
            } else {
                CheckResult {
                    check: CheckId::NonemptyPreliminary,
                    passed: true,
                    detail: "non-empty".into(),
                }
            }
        }
        Err(e) => CheckResult {
            check: CheckId::NonemptyPreliminary,
            passed: false,
            detail: format!("execution failed: {e}"),
        },
    };
    results.push(nonempty);
    results
}

fn type_compatibility(query: &SparqlQuery, slice: &SchemaSlice) -> CheckResult {
    let mut warnings: Vec<String> = Vec::new();
    // Subject-class assertions within the query: ?s a <C>.
    let rdf_type = Term::iri(vocab::RDF_TYPE);
    let class_of_subject = |subject: &PatternTerm| -> Option<String> {
        query.pattern.all_patterns().find_map(|p| {
            if p.subject == *subject && p.predicate == PatternTerm::Term(rdf_type.clone()) {
                p.object.as_term().and_then(Term::as_iri).map(str::to_string)
            } else {
                None
            }
        })
    };
    for pattern in query.pattern.all_patterns() {
        let Some(Term::Iri(predicate)) = pattern.predicate.as_term() else {
            continue;
        };
        if predicate == vocab::RDF_TYPE {
            continue;
        }
        // Domain side.
        if let Some(class) = class_of_subject(&pattern.subject) {
            if let Some(constraints) = slice.domains.get(predicate) {
                let declared_ok = constraints.declared.is_empty()
                    || constraints
                        .declared
                        .iter()
                        .any(|d| slice.is_subclass_of(&class, d));
                if !declared_ok {
                    return CheckResult {
                        check: CheckId::TypeCompatibility,
                        passed: false,
                        detail: format!(
                            "subject class <{class}> violates declared domain of <{predicate}>"
                        ),
                    };
                }
                if constraints.declared.is_empty()
                    && !constraints.inferred.is_empty()
                    && !constraints
                        .inferred
                        .iter()
                        .any(|d| slice.is_subclass_of(&class, d))
                {
                    warnings.push(format!(
                        "subject class <{class}> outside observed domain of <{predicate}>"
                    ));
                }
            }
        }
        // Range side: literal objects against declared ranges.
        if let Some(object) = pattern.object.as_term() {
            if let Some(constraints) = slice.ranges.get(predicate) {
                if !constraints.declared.is_empty() {
                    let is_datatype_range = constraints
                        .declared
                        .iter()
                        .all(|r| r.starts_with("http://www.w3.org/2001/XMLSchema#"));
                    match object {
                        Term::Literal { datatype, .. } => {
                            if !is_datatype_range {
                                return CheckResult {
                                    check: CheckId::TypeCompatibility,
                                    passed: false,
                                    detail: format!(
                                        "literal object where <{predicate}> declares a resource range"
                                    ),
                                };
                            }
                            let dt = datatype
                                .clone()
                                .unwrap_or_else(|| vocab::XSD_STRING.to_string());
                            if !constraints.declared.contains(&dt) {
                                return CheckResult {
                                    check: CheckId::TypeCompatibility,
                                    passed: false,
                                    detail: format!(
                                        "literal datatype <{dt}> outside declared range of <{predicate}>"
                                    ),
                                };
                            }
                        }
                        Term::Iri(_) | Term::BlankNode(_) => {
                            if is_datatype_range {
                                return CheckResult {
                                    check: CheckId::TypeCompatibility,
                                    passed: false,
                                    detail: format!(
                                        "resource object where <{predicate}> declares a datatype range"
                                    ),
                                };
                            }
                        }
                    }
                }
            }
        }
    }
    CheckResult {
        check: CheckId::TypeCompatibility,
        passed: true,
        detail: if warnings.is_empty() {
            "compatible".into()
        } else {
            format!("compatible with warnings: {}", warnings.join("; "))
        },
    }
}

/// Stage 2: evaluate each perturbed query and compare result multisets.
/// Returns the per-perturbation outcomes, or the execution error that
/// aborted the stage.
pub fn verify_counterfactual(
    query: &SparqlQuery,
    executor: &dyn QueryExecutor,
    perturbations: &[Perturbation],
) -> Result<(Vec<Stage2Result>, AnswerSet), String> {
    let original = executor.execute(query).map_err(|e| e.to_string())?;
    let mut results = Vec::with_capacity(perturbations.len());
    for perturbation in perturbations {
        let perturbed = apply_perturbation(query, perturbation);
        let answers = executor.execute(&perturbed).map_err(|e| e.to_string())?;
        results.push(Stage2Result {
            descriptor: perturbation.descriptor.clone(),
            changed: !answers.same_results(&original),
        });
    }
    Ok((results, original))
}

/// The full dual-stage verification. Stage 2 never runs when stage 1 fails.
/// A failed predicate-existence check yields a suggested revision via the
/// same nearest-predicate rule the synthesizer uses, when one scores above
/// the repair threshold.
pub fn verify(
    query: &SparqlQuery,
    slice: &SchemaSlice,
    executor: &dyn QueryExecutor,
    m: usize,
) -> VerificationReport {
    let stage1 = verify_symbolic(query, slice, executor);
    let graph_id = executor.graph_id().to_string();
    if stage1.iter().any(|c| !c.passed) {
        let suggested_revision = stage1
            .iter()
            .find(|c| c.check == CheckId::PredicateExistence && !c.passed)
            .and_then(|_| suggest_revision(query, slice));
        return VerificationReport {
            query: query.clone(),
            graph_id,
            stage1,
            stage2: Vec::new(),
            verdict: Verdict::FailSymbolic,
            suggested_revision,
            execution_failure: None,
        };
    }

    let perturbations = match gen_perturbations(query, slice, m) {
        Ok(p) => p,
        Err(NoPerturbableSite) => {
            // Specificity cannot be established for a constant-free query.
            return VerificationReport {
                query: query.clone(),
                graph_id,
                stage1,
                stage2: Vec::new(),
                verdict: Verdict::FailUnderspecified,
                suggested_revision: None,
                execution_failure: None,
            };
        }
    };

    match verify_counterfactual(query, executor, &perturbations) {
        Ok((stage2, _)) => {
            let any_changed = stage2.iter().any(|r| r.changed);
            VerificationReport {
                query: query.clone(),
                graph_id,
                stage1,
                verdict: if any_changed {
                    Verdict::Pass
                } else {
                    Verdict::FailUnderspecified
                },
                stage2,
                suggested_revision: None,
                execution_failure: None,
            }
        }
        Err(message) => VerificationReport {
            query: query.clone(),
            graph_id,
            stage1,
            stage2: Vec::new(),
            verdict: Verdict::FailSymbolic,
            suggested_revision: None,
            execution_failure: Some(message),
        },
    }
}

/// Replaces every unknown predicate with its nearest known counterpart;
/// None when any replacement falls below the threshold.
fn suggest_revision(query: &SparqlQuery, slice: &SchemaSlice) -> Option<SparqlQuery> {
    let mut revised = query.clone();
    let unknown: Vec<String> = query
        .constant_predicates()
        .into_iter()
        .filter(|p| !slice.has_predicate(p))
        .map(str::to_string)
        .collect();
    for faulty in unknown {
        let (replacement, score) = nearest_predicate(slice, &faulty)?;
        if score < REPAIR_JACCARD_THRESHOLD {
            return None;
        }
        for pattern in revised
            .pattern
            .required
            .iter_mut()
            .chain(revised.pattern.optionals.iter_mut().flatten())
        {
            if pattern.predicate == PatternTerm::Term(Term::iri(faulty.clone())) {
                pattern.predicate = PatternTerm::Term(Term::iri(replacement.clone()));
            }
        }
    }
    Some(revised)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kgqa_exec::LocalExecutor;
    use kgqa_rdf::{build_store, extract_schema, Triple, TripleStore};
    use std::sync::Arc;

    fn triple(s: &str, p: &str, o: Term) -> Triple {
        Triple::new(Term::iri(s), Term::iri(p), o).unwrap()
    }

    /// Store with labeled predicates and typed subjects, plus data to hit.
    fn fixture_store() -> Arc<TripleStore> {
        let ns = "http://ex/schema#";
        let code = format!("{ns}hasCode");
        let kind = format!("{ns}Resource");
        let mut triples = vec![
            triple(&code, vocab::RDFS_LABEL, Term::literal("has code")),
            triple(&kind, vocab::RDFS_LABEL, Term::literal("resource")),
        ];
        for i in 0..4 {
            let iri = format!("http://ex/r{i}");
            triples.push(triple(&iri, vocab::RDF_TYPE, Term::iri(kind.clone())));
            triples.push(triple(&iri, &code, Term::literal(format!("01115{i}"))));
        }
        Arc::new(build_store("g", triples))
    }

    fn verify_text(text: &str) -> VerificationReport {
        let store = fixture_store();
        let slice = extract_schema(&store);
        let executor = LocalExecutor::new(store);
        verify(&parse_sparql(text).unwrap(), &slice, &executor, 3)
    }

    #[test]
    fn valid_specific_query_passes_both_stages() {
        let report =
            verify_text("SELECT ?x WHERE { ?x <http://ex/schema#hasCode> \"011150\" }");
        assert!(report.stage1.iter().all(|c| c.passed));
        assert!(report.stage2.iter().any(|r| r.changed));
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn unknown_predicate_fails_check_two_with_revision() {
        let report =
            verify_text("SELECT ?x WHERE { ?x <http://ex/schema#hasCodes> \"011150\" }");
        assert_eq!(report.verdict, Verdict::FailSymbolic);
        let failed = report.failed_check().unwrap();
        assert_eq!(failed.check, CheckId::PredicateExistence);
        assert!(failed.detail.contains("hasCodes"));
        assert!(report.stage2.is_empty(), "stage 2 short-circuits");
        // The suggested revision uses the known predicate and re-verifies.
        let revised = report.suggested_revision.expect("revision");
        let store = fixture_store();
        let slice = extract_schema(&store);
        let executor = LocalExecutor::new(store);
        assert_eq!(verify(&revised, &slice, &executor, 3).verdict, Verdict::Pass);
    }

    #[test]
    fn empty_result_fails_check_four() {
        let report =
            verify_text("SELECT ?x WHERE { ?x <http://ex/schema#hasCode> \"zzz\" }");
        assert_eq!(report.verdict, Verdict::FailSymbolic);
        let failed = report.failed_check().unwrap();
        assert_eq!(failed.check, CheckId::NonemptyPreliminary);
        assert!(failed.detail.contains("empty answer set"));
    }

    #[test]
    fn constant_free_query_is_underspecified() {
        let report = verify_text("SELECT ?x WHERE { ?x ?p ?y }");
        assert_eq!(report.verdict, Verdict::FailUnderspecified);
        assert!(report.stage2.is_empty());
    }

    #[test]
    fn dead_inequality_filter_is_underspecified() {
        // The filter references a variable used in one pattern position
        // only, and its constant never occurs: perturbing it changes
        // nothing.
        let report = verify_text(
            "SELECT ?x WHERE { ?x <http://ex/schema#hasCode> ?c . FILTER(?c != \"zzz\") }",
        );
        assert_eq!(report.verdict, Verdict::FailUnderspecified);
        assert!(report.stage2.iter().all(|r| !r.changed));
    }

    #[test]
    fn predicate_replacement_counts_as_changed() {
        // Predicate-only constants: the single pattern's predicate is
        // perturbed and the (foreign or sibling) predicate changes results.
        let report = verify_text("SELECT ?x WHERE { ?x <http://ex/schema#hasCode> ?c }");
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.stage2.len(), 1);
        assert!(report.stage2[0].changed);
    }

    #[test]
    fn perturbation_cap_and_priority_order() {
        let store = fixture_store();
        let slice = extract_schema(&store);
        let query = parse_sparql(
            "SELECT ?x WHERE { ?x <http://ex/schema#hasCode> \"011150\" . \
             <http://ex/r0> <http://ex/schema#hasCode> ?y . FILTER(?y != \"a\") }",
        )
        .unwrap();
        let perturbations = gen_perturbations(&query, &slice, 3).unwrap();
        assert_eq!(perturbations.len(), 3);
        assert_eq!(perturbations[0].kind, PerturbationKind::ReplaceFilterConstant);
        assert!(perturbations[1..]
            .iter()
            .all(|p| p.kind == PerturbationKind::ReplaceEntity));
    }

    #[test]
    fn fresh_terms_are_foreign_to_the_store() {
        let store = fixture_store();
        let slice = extract_schema(&store);
        for original in [
            Term::literal("011150"),
            Term::iri("http://ex/r0"),
            Term::iri("http://ex/schema#hasCode"),
        ] {
            let fresh = fresh_term(&original, &slice);
            assert!(!store.contains_term(&fresh), "{fresh} occurs in store");
            assert_ne!(fresh, original);
        }
    }

    #[test]
    fn type_clash_against_declared_domain_fails_check_three() {
        let ns = "http://ex/schema#";
        let pred = format!("{ns}managedBy");
        let actor = format!("{ns}Actor");
        let flow = format!("{ns}Flow");
        let mut triples = vec![
            triple(&pred, vocab::RDFS_DOMAIN, Term::iri(actor.clone())),
            triple(&format!("{ns}f0"), vocab::RDF_TYPE, Term::iri(flow.clone())),
            triple(&format!("{ns}a0"), vocab::RDF_TYPE, Term::iri(actor.clone())),
            triple(&format!("{ns}a0"), &pred, Term::literal("m")),
        ];
        triples.push(triple(&flow, vocab::RDFS_LABEL, Term::literal("flow")));
        let store = Arc::new(build_store("g", triples));
        let slice = extract_schema(&store);
        let executor = LocalExecutor::new(store);
        let query = parse_sparql(&format!(
            "SELECT ?x WHERE {{ ?x a <{flow}> . ?x <{pred}> ?v }}"
        ))
        .unwrap();
        let report = verify(&query, &slice, &executor, 3);
        assert_eq!(report.verdict, Verdict::FailSymbolic);
        assert_eq!(report.failed_check().unwrap().check, CheckId::TypeCompatibility);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = verify_text("SELECT ?x WHERE { ?x <http://ex/schema#hasCode> \"011150\" }");
        let b = verify_text("SELECT ?x WHERE { ?x <http://ex/schema#hasCode> \"011150\" }");
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(
            a.stage2.iter().map(|r| r.changed).collect::<Vec<_>>(),
            b.stage2.iter().map(|r| r.changed).collect::<Vec<_>>()
        );
    }
}
