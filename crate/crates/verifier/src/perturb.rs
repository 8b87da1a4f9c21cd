//! Counterfactual perturbations: constants in the query are swapped for
//! guaranteed-foreign terms (or a different same-domain predicate) and the
//! result sets compared.

use kgqa_rdf::{SchemaSlice, Term};
use kgqa_sparql::{FilterRhs, PatternTerm, SparqlQuery};
use serde::Serialize;

pub const SENTINEL: char = '\u{27C2}'; // ⟂

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    ReplaceFilterConstant,
    ReplaceEntity,
    ReplacePredicate,
}

/// AST site of a perturbation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Site {
    Filter(usize),
    /// (required-block? none=required, some=optional block index, pattern
    /// index, position 0/1/2)
    Pattern {
        optional_block: Option<usize>,
        pattern: usize,
        position: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub site: Site,
    /// Replacement: a term for entity/predicate sites, a pattern string for
    /// REGEX filter constants.
    pub replacement: Replacement,
    pub descriptor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Replacement {
    Term(Term),
    Pattern(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("query has no perturbable site (no constants)")]
pub struct NoPerturbableSite;

fn sentinel_wrap(lexical: &str, rounds: usize) -> String {
    let mut out = String::new();
    for _ in 0..=rounds {
        out.push(SENTINEL);
    }
    out.push_str(lexical);
    for _ in 0..=rounds {
        out.push(SENTINEL);
    }
    out
}

/// A fresh term absent from the slice: the original lexical form wrapped in
/// sentinels, with extra sentinel layers on (astronomically unlikely)
/// collisions. IRIs keep their scheme so they stay valid IRIs.
pub fn fresh_term(original: &Term, slice: &SchemaSlice) -> Term {
    for rounds in 0.. {
        let candidate = match original {
            Term::Iri(iri) => Term::iri(format!("{iri}{}", sentinel_wrap("", rounds))),
            Term::Literal { lexical, datatype, lang } => Term::Literal {
                lexical: sentinel_wrap(lexical, rounds),
                datatype: datatype.clone(),
                lang: lang.clone(),
            },
            Term::BlankNode(label) => Term::blank(sentinel_wrap(label, rounds)),
        };
        let absent = match &candidate {
            Term::Iri(iri) => !slice.contains_iri(iri),
            _ => true,
        };
        if absent {
            return candidate;
        }
    }
    unreachable!()
}

/// A different predicate sharing a domain class with the original, when one
/// exists (smallest IRI wins); otherwise a foreign predicate. Structural
/// vocabulary (rdf:type, rdfs:label and friends) never substitutes for a
/// domain predicate.
fn replacement_predicate(original: &str, slice: &SchemaSlice) -> Term {
    let structural = |iri: &str| {
        iri.starts_with("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
            || iri.starts_with("http://www.w3.org/2000/01/rdf-schema#")
            || iri.starts_with("http://www.w3.org/2002/07/owl#")
    };
    let original_domains = slice
        .domains
        .get(original)
        .map(|c| c.all())
        .unwrap_or_default();
    let mut candidates: Vec<&String> = slice
        .predicates
        .iter()
        .filter(|(iri, usage)| {
            **usage > 0
                && iri.as_str() != original
                && !structural(iri)
                && slice
                    .domains
                    .get(*iri)
                    .map(|c| c.all().intersection(&original_domains).next().is_some())
                    .unwrap_or(false)
        })
        .map(|(iri, _)| iri)
        .collect();
    candidates.sort();
    match candidates.first() {
        Some(iri) => Term::iri((*iri).clone()),
        None => fresh_term(&Term::iri(original), slice),
    }
}

/// Perturbation sites in priority order: filter constants first, then
/// entity constants (subjects/objects) in AST preorder. Predicate sites are
/// the weakest specificity signal and are generated only when the query has
/// no filter or entity constants at all. At most `m` perturbations.
pub fn gen_perturbations(
    query: &SparqlQuery,
    slice: &SchemaSlice,
    m: usize,
) -> Result<Vec<Perturbation>, NoPerturbableSite> {
    let mut out: Vec<Perturbation> = Vec::new();

    for (idx, filter) in query.filters.iter().enumerate() {
        let (replacement, shown) = match &filter.rhs {
            FilterRhs::Term(term) => {
                let fresh = fresh_term(term, slice);
                (Replacement::Term(fresh.clone()), fresh.to_string())
            }
            FilterRhs::Pattern(pattern) => {
                let fresh = sentinel_wrap(pattern, 0);
                (Replacement::Pattern(fresh.clone()), format!("\"{fresh}\""))
            }
            FilterRhs::LangTag(tag) => {
                let fresh = sentinel_wrap(tag, 0);
                (Replacement::Pattern(fresh.clone()), format!("\"{fresh}\""))
            }
        };
        out.push(Perturbation {
            kind: PerturbationKind::ReplaceFilterConstant,
            site: Site::Filter(idx),
            descriptor: format!("filter[{idx}] constant -> {shown}"),
            replacement,
        });
    }

    let mut pattern_sites = Vec::new();
    let blocks: Vec<(Option<usize>, &[kgqa_sparql::TriplePattern])> =
        std::iter::once((None, query.pattern.required.as_slice()))
            .chain(
                query
                    .pattern
                    .optionals
                    .iter()
                    .enumerate()
                    .map(|(i, b)| (Some(i), b.as_slice())),
            )
            .collect();
    for (optional_block, patterns) in &blocks {
        for (pattern_idx, pattern) in patterns.iter().enumerate() {
            for (slot, position) in [(&pattern.subject, 0usize), (&pattern.object, 2)] {
                if let PatternTerm::Term(term) = slot {
                    let fresh = fresh_term(term, slice);
                    pattern_sites.push(Perturbation {
                        kind: PerturbationKind::ReplaceEntity,
                        site: Site::Pattern {
                            optional_block: *optional_block,
                            pattern: pattern_idx,
                            position,
                        },
                        descriptor: format!(
                            "pattern[{pattern_idx}]{} {} -> {fresh}",
                            optional_block
                                .map(|b| format!(" (optional {b})"))
                                .unwrap_or_default(),
                            if position == 0 { "subject" } else { "object" },
                        ),
                        replacement: Replacement::Term(fresh),
                    });
                }
            }
        }
    }
    out.extend(pattern_sites);

    if out.is_empty() {
        // Last resort: predicate sites.
        for (optional_block, patterns) in &blocks {
            for (pattern_idx, pattern) in patterns.iter().enumerate() {
                if let PatternTerm::Term(Term::Iri(iri)) = &pattern.predicate {
                    let replacement = replacement_predicate(iri, slice);
                    out.push(Perturbation {
                        kind: PerturbationKind::ReplacePredicate,
                        site: Site::Pattern {
                            optional_block: *optional_block,
                            pattern: pattern_idx,
                            position: 1,
                        },
                        descriptor: format!(
                            "pattern[{pattern_idx}]{} predicate -> {replacement:?}",
                            optional_block
                                .map(|b| format!(" (optional {b})"))
                                .unwrap_or_default(),
                        ),
                        replacement: Replacement::Term(replacement),
                    });
                }
            }
        }
    }

    if out.is_empty() {
        return Err(NoPerturbableSite);
    }
    out.truncate(m.max(1));
    Ok(out)
}

/// Applies one perturbation to a clone of the query.
pub fn apply_perturbation(query: &SparqlQuery, perturbation: &Perturbation) -> SparqlQuery {
    let mut out = query.clone();
    match &perturbation.site {
        Site::Filter(idx) => {
            if let Some(filter) = out.filters.get_mut(*idx) {
                match (&perturbation.replacement, &mut filter.rhs) {
                    (Replacement::Term(term), FilterRhs::Term(slot)) => *slot = term.clone(),
                    (Replacement::Pattern(p), FilterRhs::Pattern(slot)) => *slot = p.clone(),
                    (Replacement::Pattern(p), FilterRhs::LangTag(slot)) => *slot = p.clone(),
                    _ => {}
                }
            }
        }
        Site::Pattern {
            optional_block,
            pattern,
            position,
        } => {
            let target = match optional_block {
                None => out.pattern.required.get_mut(*pattern),
                Some(block) => out
                    .pattern
                    .optionals
                    .get_mut(*block)
                    .and_then(|b| b.get_mut(*pattern)),
            };
            if let (Some(p), Replacement::Term(term)) = (target, &perturbation.replacement) {
                let slot = match position {
                    0 => &mut p.subject,
                    1 => &mut p.predicate,
                    _ => &mut p.object,
                };
                *slot = PatternTerm::Term(term.clone());
            }
        }
    }
    out
}
