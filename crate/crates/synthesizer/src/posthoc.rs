//! Post-hoc decoding: the model-agnostic validation and targeted-repair
//! layer every query passes through before verification. Rules apply at
//! most once per site, so the pass is idempotent, and a query that already
//! satisfies every check comes out structurally identical.

use crate::SynthError;
use kgqa_rdf::text::{local_name, namespace, token_jaccard, tokenize};
use kgqa_rdf::{SchemaSlice, Term};
use kgqa_sparql::{
    parse_sparql, serialize_sparql, FilterExpr, FilterOp, FilterRhs, PatternTerm, SparqlError,
    SparqlQuery, Variable,
};
use regex::Regex;
use serde::Serialize;
use std::collections::BTreeSet;

pub const REPAIR_JACCARD_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Cosmetic,
    Structural,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepairEntry {
    pub rule: String,
    pub before: String,
    pub after: String,
    pub severity: Severity,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RepairLog {
    pub entries: Vec<RepairEntry>,
}

impl RepairLog {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn structural_predicate_repairs(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| {
                e.severity == Severity::Structural
                    && (e.rule == "unknown-predicate" || e.rule == "unused-predicate")
            })
            .count()
    }

    fn push(&mut self, rule: &str, before: impl Into<String>, after: impl Into<String>, severity: Severity) {
        self.entries.push(RepairEntry {
            rule: rule.to_string(),
            before: before.into(),
            after: after.into(),
            severity,
        });
    }
}

pub enum PosthocInput<'a> {
    Raw(&'a str),
    Ast(SparqlQuery),
}

/// The label-nearest used predicate for a faulty IRI: best token-Jaccard
/// between the faulty local name and each candidate's local name or labels.
/// Ties break toward the lexicographically smaller IRI.
pub fn nearest_predicate(slice: &SchemaSlice, faulty: &str) -> Option<(String, f64)> {
    let faulty_tokens = tokenize(local_name(faulty));
    let mut best: Option<(String, f64)> = None;
    for (candidate, usage) in &slice.predicates {
        if *usage == 0 || candidate == faulty {
            continue;
        }
        let mut score = token_jaccard(&faulty_tokens, &tokenize(local_name(candidate)));
        if let Some(labels) = slice.labels_of(candidate) {
            for label in labels {
                score = score.max(token_jaccard(&faulty_tokens, &tokenize(label)));
            }
        }
        let better = match &best {
            None => score > 0.0,
            Some((best_iri, best_score)) => {
                score > *best_score || (score == *best_score && candidate < best_iri)
            }
        };
        if better {
            best = Some((candidate.clone(), score));
        }
    }
    best
}

/// Candidate namespace for an undeclared prefix: the unique slice namespace
/// under which every local name used with that prefix exists.
fn infer_namespace(prefix: &str, text: &str, slice: &SchemaSlice) -> Option<String> {
    let pattern = format!(r"\b{}:([A-Za-z_][A-Za-z0-9_.-]*)", regex::escape(prefix));
    let re = Regex::new(&pattern).ok()?;
    let locals: BTreeSet<String> = re
        .captures_iter(text)
        .map(|c| c[1].to_string())
        .collect();
    if locals.is_empty() {
        return None;
    }
    let mut namespaces: BTreeSet<String> = BTreeSet::new();
    for iri in slice
        .predicates
        .keys()
        .chain(slice.classes.keys())
        .chain(slice.labels.keys())
    {
        namespaces.insert(namespace(iri).to_string());
    }
    let known = |iri: &str| slice.contains_iri(iri);
    let candidates: Vec<String> = namespaces
        .into_iter()
        .filter(|ns| locals.iter().all(|l| known(&format!("{ns}{l}"))))
        .collect();
    match candidates.as_slice() {
        [only] => Some(only.clone()),
        _ => None,
    }
}

fn rewrite_predicate(query: &mut SparqlQuery, from: &str, to: &str) {
    let rewrite = |pattern: &mut kgqa_sparql::TriplePattern| {
        if let PatternTerm::Term(Term::Iri(iri)) = &pattern.predicate {
            if iri == from {
                pattern.predicate = PatternTerm::Term(Term::iri(to));
            }
        }
    };
    for p in &mut query.pattern.required {
        rewrite(p);
    }
    for block in &mut query.pattern.optionals {
        for p in block {
            rewrite(p);
        }
    }
}

pub fn posthoc_decode(
    input: PosthocInput<'_>,
    slice: &SchemaSlice,
) -> Result<(SparqlQuery, RepairLog), SynthError> {
    let mut log = RepairLog::default();

    // Syntax and prefix resolution (raw text only). Undeclared prefixes are
    // injected from the slice's namespaces when the choice is unambiguous.
    let mut query = match input {
        PosthocInput::Ast(query) => query,
        PosthocInput::Raw(text) => {
            let mut text = text.to_string();
            loop {
                match parse_sparql(&text) {
                    Ok(query) => break query,
                    Err(SparqlError::UndefinedPrefix(prefix)) => {
                        let Some(ns) = infer_namespace(&prefix, &text, slice) else {
                            return Err(SynthError::Unrepairable {
                                rule: "undefined-prefix".into(),
                                detail: format!(
                                    "prefix `{prefix}` has no unambiguous namespace in the schema"
                                ),
                            });
                        };
                        log.push(
                            "inject-prefix",
                            format!("{prefix}: (undeclared)"),
                            format!("{prefix}: <{ns}>"),
                            Severity::Cosmetic,
                        );
                        text = format!("PREFIX {prefix}: <{ns}>\n{text}");
                    }
                    Err(e) => {
                        return Err(SynthError::Unrepairable {
                            rule: "syntax".into(),
                            detail: e.to_string(),
                        })
                    }
                }
            }
        }
    };

    // Predicate usage: unknown predicates are replaced by the label-nearest
    // used predicate above the threshold; declared-but-unused predicates are
    // likewise replaced or flagged as empty-answer-prone.
    let constant_predicates: Vec<String> = query
        .constant_predicates()
        .iter()
        .map(|s| s.to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for predicate in constant_predicates {
        if !slice.has_predicate(&predicate) {
            match nearest_predicate(slice, &predicate) {
                Some((replacement, score)) if score >= REPAIR_JACCARD_THRESHOLD => {
                    rewrite_predicate(&mut query, &predicate, &replacement);
                    log.push("unknown-predicate", &predicate, &replacement, Severity::Structural);
                }
                _ => {
                    return Err(SynthError::Unrepairable {
                        rule: "unknown-predicate".into(),
                        detail: format!(
                            "predicate <{predicate}> is not in the schema and no replacement \
                             scores above {REPAIR_JACCARD_THRESHOLD}"
                        ),
                    })
                }
            }
        } else if slice.predicate_usage(&predicate) == 0 {
            match nearest_predicate(slice, &predicate) {
                Some((replacement, score)) if score >= REPAIR_JACCARD_THRESHOLD => {
                    rewrite_predicate(&mut query, &predicate, &replacement);
                    log.push("unused-predicate", &predicate, &replacement, Severity::Structural);
                }
                _ => {
                    // Guaranteed-empty shape; flagged for the verifier.
                    log.push(
                        "flag-empty-prone",
                        &predicate,
                        &predicate,
                        Severity::Cosmetic,
                    );
                }
            }
        }
    }

    // Fully constant patterns carry no bindings and are prone to empty
    // answers; the object moves into an equality filter so the constant
    // stays visible to counterfactual checks.
    let mut fresh = 0usize;
    let mut extra_filters: Vec<FilterExpr> = Vec::new();
    let mut rewrite_constant = |pattern: &mut kgqa_sparql::TriplePattern| {
        let all_constant = pattern.positions().iter().all(|p| !p.is_var());
        if all_constant {
            if let PatternTerm::Term(object) = pattern.object.clone() {
                let var = Variable::new(format!("c{fresh}"));
                fresh += 1;
                extra_filters.push(FilterExpr {
                    var: var.clone(),
                    op: FilterOp::Eq,
                    rhs: FilterRhs::Term(object.clone()),
                });
                let before = pattern.to_string();
                pattern.object = PatternTerm::Var(var);
                return Some((before, pattern.to_string()));
            }
        }
        None
    };
    let mut constant_rewrites = Vec::new();
    for p in &mut query.pattern.required {
        if let Some(change) = rewrite_constant(p) {
            constant_rewrites.push(change);
        }
    }
    for block in &mut query.pattern.optionals {
        for p in block {
            if let Some(change) = rewrite_constant(p) {
                constant_rewrites.push(change);
            }
        }
    }
    for (before, after) in constant_rewrites {
        log.push("constant-pattern-to-filter", before, after, Severity::Structural);
    }
    query.filters.extend(extra_filters);

    // Binding check and final round-trip through the canonical form.
    let rendered = serialize_sparql(&query);
    let reparsed = parse_sparql(&rendered).map_err(|e| SynthError::Unrepairable {
        rule: match e {
            SparqlError::UnboundVariable(_) => "unbound-projection".into(),
            _ => "syntax-roundtrip".into(),
        },
        detail: e.to_string(),
    })?;

    Ok((reparsed, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use kgqa_rdf::{build_store, extract_schema, vocab, Triple};

    fn slice_with(preds: &[(&str, &str)]) -> SchemaSlice {
        let mut triples = Vec::new();
        for (i, (pred, label)) in preds.iter().enumerate() {
            triples.push(
                Triple::new(
                    Term::iri(format!("http://ex/i{i}")),
                    Term::iri(*pred),
                    Term::literal("v"),
                )
                .unwrap(),
            );
            triples.push(
                Triple::new(
                    Term::iri(*pred),
                    Term::iri(vocab::RDFS_LABEL),
                    Term::literal(*label),
                )
                .unwrap(),
            );
        }
        extract_schema(&build_store("g", triples))
    }

    #[test]
    fn valid_query_is_a_fixpoint() {
        let slice = slice_with(&[("http://ex/schema#hasCode", "has code")]);
        let query = parse_sparql("SELECT ?x WHERE { ?x <http://ex/schema#hasCode> ?y }").unwrap();
        let (out, log) = posthoc_decode(PosthocInput::Ast(query.clone()), &slice).unwrap();
        assert_eq!(out, query);
        assert!(log.is_empty());
    }

    #[test]
    fn unknown_predicate_replaced_by_label_nearest() {
        let slice = slice_with(&[("http://ex/schema#hasCode", "has code")]);
        let query = parse_sparql("SELECT ?x WHERE { ?x <http://ex/schema#hasCodes> ?y }").unwrap();
        let (out, log) = posthoc_decode(PosthocInput::Ast(query), &slice).unwrap();
        assert_eq!(
            out.constant_predicates(),
            vec!["http://ex/schema#hasCode"]
        );
        assert_eq!(log.structural_predicate_repairs(), 1);
        assert_eq!(log.entries[0].rule, "unknown-predicate");
    }

    #[test]
    fn unknown_predicate_below_threshold_fails_loudly() {
        let slice = slice_with(&[("http://ex/schema#hasCode", "has code")]);
        let query =
            parse_sparql("SELECT ?x WHERE { ?x <http://ex/schema#completelyOther> ?y }").unwrap();
        match posthoc_decode(PosthocInput::Ast(query), &slice) {
            Err(SynthError::Unrepairable { rule, .. }) => assert_eq!(rule, "unknown-predicate"),
            other => panic!("expected unrepairable, got {other:?}"),
        }
    }

    #[test]
    fn undeclared_prefix_injected_from_slice_namespace() {
        let slice = slice_with(&[("http://ex/schema#hasCode", "has code")]);
        let raw = "SELECT ?x WHERE { ?x ex:hasCode ?y }";
        let (out, log) = posthoc_decode(PosthocInput::Raw(raw), &slice).unwrap();
        assert_eq!(out.prefixes.get("ex"), Some(&"http://ex/schema#".to_string()));
        assert_eq!(log.entries[0].rule, "inject-prefix");
        assert_eq!(log.entries[0].severity, Severity::Cosmetic);
    }

    #[test]
    fn constant_pattern_moves_object_into_filter() {
        let slice = slice_with(&[("http://ex/schema#hasCode", "has code")]);
        let query = parse_sparql(
            "SELECT ?y WHERE { <http://ex/i0> <http://ex/schema#hasCode> \"v\" . ?z <http://ex/schema#hasCode> ?y }",
        )
        .unwrap();
        let (out, log) = posthoc_decode(PosthocInput::Ast(query), &slice).unwrap();
        assert!(log.entries.iter().any(|e| e.rule == "constant-pattern-to-filter"));
        assert_eq!(out.filters.len(), 1);
        assert!(out
            .pattern
            .required
            .iter()
            .all(|p| p.positions().iter().any(|t| t.is_var())));
    }

    #[test]
    fn posthoc_is_idempotent() {
        let slice = slice_with(&[("http://ex/schema#hasCode", "has code")]);
        let query = parse_sparql(
            "SELECT ?y WHERE { <http://ex/i0> <http://ex/schema#hasCodes> \"v\" . ?z <http://ex/schema#hasCode> ?y }",
        )
        .unwrap();
        let (once, log1) = posthoc_decode(PosthocInput::Ast(query), &slice).unwrap();
        let (twice, log2) = posthoc_decode(PosthocInput::Ast(once.clone()), &slice).unwrap();
        assert_eq!(once, twice);
        assert!(!log1.is_empty());
        assert!(log2.is_empty());
    }

    #[test]
    fn declared_but_unused_predicate_is_flagged_when_unrepairable() {
        let mut triples = vec![
            Triple::new(
                Term::iri("http://ex/schema#ghost"),
                Term::iri(vocab::RDFS_DOMAIN),
                Term::iri("http://ex/schema#Thing"),
            )
            .unwrap(),
        ];
        triples.push(
            Triple::new(
                Term::iri("http://ex/i0"),
                Term::iri("http://ex/schema#unrelatedTerm"),
                Term::literal("v"),
            )
            .unwrap(),
        );
        let slice = extract_schema(&build_store("g", triples));
        let query = parse_sparql("SELECT ?x WHERE { ?x <http://ex/schema#ghost> ?y }").unwrap();
        let (_, log) = posthoc_decode(PosthocInput::Ast(query), &slice).unwrap();
        assert!(log.entries.iter().any(|e| e.rule == "flag-empty-prone"));
    }
}
