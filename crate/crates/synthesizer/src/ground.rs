//! Schema grounding: placeholders become concrete IRIs, literals or
//! variables, with declared domain constraints enforced.

use crate::template::{QueryTemplate, SlotDefault, SlotKind};
use crate::SynthError;
use kgqa_nlu::{ConstraintOp, Lexicon, LiteralConstraint, Subgoal};
use kgqa_rdf::{vocab, SchemaSlice, Term};
use kgqa_sparql::{parse_sparql, SparqlQuery};
use kgqa_allocator::GroundingMap;

/// How a mention resolved against the chosen graph.
#[derive(Debug, Clone, PartialEq)]
enum Resolved {
    Predicate(String),
    Class(String),
    Instance(String),
}

fn resolve(mention: &str, grounding: &GroundingMap, slice: &SchemaSlice) -> Option<Resolved> {
    let iri = grounding.get(mention)?;
    if slice.has_predicate(iri) {
        Some(Resolved::Predicate(iri.clone()))
    } else if slice.classes.contains_key(iri) {
        Some(Resolved::Class(iri.clone()))
    } else {
        Some(Resolved::Instance(iri.clone()))
    }
}

/// Mentions in predicate-slot order: entity mentions that carry a literal
/// constraint come first (they pair with the VALUE slot), then explicit
/// predicate mentions, then the rest.
fn ordered_mentions(subgoal: &Subgoal) -> Vec<&str> {
    let carries = |mention: &str| {
        subgoal
            .literal_constraints
            .iter()
            .any(|c| mention.contains(&c.mention))
    };
    let mut out: Vec<&str> = Vec::new();
    for m in &subgoal.entity_mentions {
        if carries(m) {
            out.push(m);
        }
    }
    for m in &subgoal.predicate_mentions {
        out.push(m);
    }
    for m in &subgoal.entity_mentions {
        if !carries(m) {
            out.push(m);
        }
    }
    out
}

/// Predicate IRIs for PRED_1..n. Ungrounded mentions fall back to the
/// lexicon hint, which may name a predicate absent from the graph; the
/// post-hoc stage repairs or rejects those.
fn predicate_candidates(
    subgoal: &Subgoal,
    grounding: &GroundingMap,
    slice: &SchemaSlice,
    lexicon: &Lexicon,
) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for mention in ordered_mentions(subgoal) {
        let candidate = match resolve(mention, grounding, slice) {
            Some(Resolved::Predicate(iri)) => Some(iri),
            Some(_) => None,
            None => lexicon.predicate_hint(mention).map(|e| e.hint.clone()),
        };
        if let Some(iri) = candidate {
            if !out.contains(&iri) {
                out.push(iri);
            }
        }
    }
    out
}

fn class_candidate(
    subgoal: &Subgoal,
    grounding: &GroundingMap,
    slice: &SchemaSlice,
    lexicon: &Lexicon,
) -> Option<String> {
    for mention in subgoal.all_mentions() {
        if let Some(Resolved::Class(iri)) = resolve(mention, grounding, slice) {
            return Some(iri);
        }
    }
    // Lexicon hint, accepted only when the class exists in this graph.
    for mention in subgoal.all_mentions() {
        if let Some(entry) = lexicon.class_hint(mention) {
            if slice.classes.contains_key(&entry.hint) {
                return Some(entry.hint.clone());
            }
        }
    }
    None
}

/// The literal for a VALUE slot. Ordering comparisons get numeric XSD types
/// so the engine compares numerically; equality keeps the plain lexical form
/// (codes with leading zeros stay strings).
pub fn constraint_term(constraint: &LiteralConstraint) -> Term {
    let numeric_op = !matches!(constraint.op, ConstraintOp::Eq | ConstraintOp::Ne);
    if numeric_op {
        if constraint.mention.parse::<i64>().is_ok() {
            return Term::typed_literal(&constraint.mention, vocab::XSD_INTEGER);
        }
        if constraint.mention.parse::<f64>().is_ok() {
            return Term::typed_literal(&constraint.mention, vocab::XSD_DECIMAL);
        }
    }
    Term::literal(&constraint.mention)
}

fn op_symbol(op: ConstraintOp) -> &'static str {
    match op {
        ConstraintOp::Eq => "=",
        ConstraintOp::Ne => "!=",
        ConstraintOp::Gt => ">",
        ConstraintOp::Ge => ">=",
        ConstraintOp::Lt => "<",
        ConstraintOp::Le => "<=",
    }
}

/// Most populous class among a predicate's effective domain constraints.
fn domain_default(predicate: &str, slice: &SchemaSlice) -> Option<String> {
    let constraints = slice.domains.get(predicate)?;
    let domains = constraints.effective();
    domains
        .iter()
        .max_by(|a, b| {
            let ca = slice.classes.get(*a).copied().unwrap_or(0);
            let cb = slice.classes.get(*b).copied().unwrap_or(0);
            ca.cmp(&cb).then_with(|| b.cmp(a))
        })
        .cloned()
}

pub fn ground(
    template: &QueryTemplate,
    subgoal: &Subgoal,
    grounding: &GroundingMap,
    slice: &SchemaSlice,
    lexicon: &Lexicon,
    dep_value: Option<&Term>,
) -> Result<SparqlQuery, SynthError> {
    let predicates = predicate_candidates(subgoal, grounding, slice, lexicon);
    let mut text = template.skeleton.clone();
    let mut bound_class: Option<String> = None;

    // Predicate slots resolve first: they are the usual root cause of a
    // grounding failure and the SUBJ_CLASS default derives from PRED_1.
    let mut slots: Vec<&crate::template::SlotSpec> = template.slots.iter().collect();
    slots.sort_by_key(|s| match s.kind {
        SlotKind::Predicate => 0,
        _ => 1,
    });

    for slot in slots {
        let placeholder = format!("{{{}}}", slot.name);
        let rendering = match slot.kind {
            SlotKind::Predicate => {
                // PRED_1, PRED_2, ... take candidates in order.
                let index: usize = slot
                    .name
                    .strip_prefix("PRED_")
                    .and_then(|n| n.parse::<usize>().ok())
                    .unwrap_or(1)
                    - 1;
                let iri = predicates.get(index).ok_or_else(|| SynthError::UngroundableSlot {
                    slot: slot.name.clone(),
                    detail: format!(
                        "no predicate grounding or lexicon default among {:?}",
                        subgoal.all_mentions()
                    ),
                })?;
                format!("<{iri}>")
            }
            SlotKind::Class => {
                let class = match class_candidate(subgoal, grounding, slice, lexicon) {
                    Some(c) => c,
                    None => match slot.default {
                        Some(SlotDefault::PredicateDomain) => predicates
                            .first()
                            .and_then(|p| domain_default(p, slice))
                            .ok_or_else(|| SynthError::UngroundableSlot {
                                slot: slot.name.clone(),
                                detail: "no class mention and no derivable predicate domain"
                                    .to_string(),
                            })?,
                        _ => {
                            return Err(SynthError::UngroundableSlot {
                                slot: slot.name.clone(),
                                detail: "no mention grounded to a class".to_string(),
                            })
                        }
                    },
                };
                bound_class = Some(class.clone());
                format!("<{class}>")
            }
            SlotKind::Value => {
                let value = if template.dependent {
                    dep_value.cloned()
                } else {
                    subgoal
                        .literal_constraints
                        .first()
                        .map(constraint_term)
                        .or_else(|| {
                            subgoal.all_mentions().into_iter().find_map(|m| {
                                match resolve(m, grounding, slice) {
                                    Some(Resolved::Instance(iri)) => Some(Term::iri(iri)),
                                    _ => None,
                                }
                            })
                        })
                };
                match (value, slot.default) {
                    (Some(term), _) => term.to_string(),
                    (None, Some(SlotDefault::Variable)) => "?w".to_string(),
                    (None, _) => {
                        return Err(SynthError::UngroundableSlot {
                            slot: slot.name.clone(),
                            detail: "no literal constraint, instance grounding or dependency value"
                                .to_string(),
                        })
                    }
                }
            }
            SlotKind::Operator => op_symbol(
                subgoal
                    .literal_constraints
                    .first()
                    .map(|c| c.op)
                    .unwrap_or(ConstraintOp::Eq),
            )
            .to_string(),
            SlotKind::Direction => if subgoal.descending { "DESC" } else { "ASC" }.to_string(),
            SlotKind::Variable => "?j".to_string(),
        };
        text = text.replace(&placeholder, &rendering);
    }

    // Declared-domain enforcement: a bound subject class must be a subclass
    // of every grounded predicate's declared domain. Observed-only domains
    // are advisory here; the verifier warns about those.
    if let Some(class) = &bound_class {
        for predicate in &predicates {
            if let Some(constraints) = slice.domains.get(predicate) {
                if !constraints.declared.is_empty() {
                    let ok = constraints
                        .declared
                        .iter()
                        .any(|d| slice.is_subclass_of(class, d));
                    if !ok {
                        return Err(SynthError::IncompatibleTyping {
                            predicate: predicate.clone(),
                            declared: constraints
                                .declared
                                .iter()
                                .cloned()
                                .collect::<Vec<_>>()
                                .join(", "),
                            bound: class.clone(),
                        });
                    }
                }
            }
        }
    }

    parse_sparql(&text).map_err(|e| SynthError::Internal {
        detail: format!("grounded skeleton failed to parse: {e} in `{text}`"),
    })
}
