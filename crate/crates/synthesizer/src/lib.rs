//! Pattern-driven SPARQL synthesis: select a skeleton for the subgoal's
//! intent, ground its placeholders against the allocated graph's schema,
//! then run post-hoc decoding for validation and targeted repair.

pub mod ground;
pub mod posthoc;
pub mod template;

pub use ground::{constraint_term, ground};
pub use posthoc::{
    nearest_predicate, posthoc_decode, PosthocInput, RepairEntry, RepairLog, Severity,
    REPAIR_JACCARD_THRESHOLD,
};
pub use template::{
    QueryTemplate, SlotDefault, SlotKind, SlotSpec, TemplateError, TemplateLibrary,
    DEFAULT_TEMPLATES_JSON,
};

use kgqa_allocator::GroundingMap;
use kgqa_nlu::{Intent, Lexicon, Subgoal};
use kgqa_rdf::{SchemaSlice, Term};
use kgqa_sparql::{FilterExpr, FilterOp, FilterRhs, Variable};

pub const DEFAULT_FANOUT_CAP: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("no template for intent {intent:?} with arity {arity} (dependent: {dependent})")]
    NoTemplate {
        intent: Intent,
        arity: usize,
        dependent: bool,
    },
    #[error("slot {slot} cannot be grounded: {detail}")]
    UngroundableSlot { slot: String, detail: String },
    #[error("predicate <{predicate}> declares domain {{{declared}}} but the template binds class <{bound}>")]
    IncompatibleTyping {
        predicate: String,
        declared: String,
        bound: String,
    },
    #[error("unrepairable query ({rule}): {detail}")]
    Unrepairable { rule: String, detail: String },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("internal synthesis error: {detail}")]
    Internal { detail: String },
}

/// One synthesized query. `seed` is the dependency value a fan-out query
/// was instantiated with, carried through so fused rows can pair upstream
/// and downstream bindings.
#[derive(Debug, Clone)]
pub struct SynthesizedQuery {
    pub query: kgqa_sparql::SparqlQuery,
    pub repairs: RepairLog,
    pub seed: Option<Term>,
}

/// Distinct values from the dependency subgoal's answer rows, in row order.
#[derive(Debug, Clone, Default)]
pub struct DependencyValues {
    pub values: Vec<Term>,
}

/// The template registered for this subgoal's intent and arity. Arity is
/// the number of predicate slots the subgoal can fill: explicit predicate
/// mentions plus entity mentions carrying a literal constraint.
pub fn select_template<'a>(
    library: &'a TemplateLibrary,
    subgoal: &Subgoal,
) -> Result<&'a QueryTemplate, SynthError> {
    let dependent = subgoal.depends_on.is_some();
    let arity = effective_arity(subgoal);
    library
        .find(subgoal.intent, arity, dependent)
        .ok_or(SynthError::NoTemplate {
            intent: subgoal.intent,
            arity,
            dependent,
        })
}

fn effective_arity(subgoal: &Subgoal) -> usize {
    match subgoal.intent {
        Intent::Aggregation => subgoal.predicate_mentions.len().clamp(1, 2),
        Intent::ConditionFilter | Intent::Comparison => 1,
        Intent::CoOccurrence => {
            if subgoal.depends_on.is_some() {
                1
            } else {
                2
            }
        }
        Intent::EntityLookup => {
            (subgoal.predicate_mentions.len() + subgoal.literal_constraints.len().min(1))
                .clamp(1, 2)
        }
    }
}

/// Full synthesis for one subgoal: template selection, grounding, post-hoc
/// decoding. Dependent subgoals fan out one query per distinct dependency
/// value up to the cap; beyond it the values fold into a single anchored
/// REGEX alternation filter.
pub fn synthesize(
    subgoal: &Subgoal,
    grounding: &GroundingMap,
    slice: &SchemaSlice,
    lexicon: &Lexicon,
    library: &TemplateLibrary,
    deps: Option<&DependencyValues>,
    fanout_cap: usize,
) -> Result<Vec<SynthesizedQuery>, SynthError> {
    let template = select_template(library, subgoal)?;
    if !template.dependent {
        let query = ground(template, subgoal, grounding, slice, lexicon, None)?;
        let (query, repairs) = posthoc_decode(PosthocInput::Ast(query), slice)?;
        return Ok(vec![SynthesizedQuery {
            query,
            repairs,
            seed: None,
        }]);
    }

    let values = deps.map(|d| d.values.as_slice()).unwrap_or(&[]);
    if values.is_empty() {
        return Err(SynthError::UngroundableSlot {
            slot: "VALUE".into(),
            detail: "dependency produced no values".into(),
        });
    }

    let cap = fanout_cap.max(1);
    if values.len() <= cap {
        let mut out = Vec::with_capacity(values.len());
        for value in values {
            let query = ground(template, subgoal, grounding, slice, lexicon, Some(value))?;
            let (query, repairs) = posthoc_decode(PosthocInput::Ast(query), slice)?;
            out.push(SynthesizedQuery {
                query,
                repairs,
                seed: Some(value.clone()),
            });
        }
        return Ok(out);
    }

    // Fold: a single query over a fresh variable constrained to the value
    // set by an anchored alternation.
    let surrogate = Term::iri("urn:kgqa:fold");
    let mut query = ground(template, subgoal, grounding, slice, lexicon, Some(&surrogate))?;
    let fold_var = Variable::new("vdep");
    let mut replaced = false;
    for pattern in query
        .pattern
        .required
        .iter_mut()
        .chain(query.pattern.optionals.iter_mut().flatten())
    {
        for slot in [
            &mut pattern.subject,
            &mut pattern.predicate,
            &mut pattern.object,
        ] {
            if let kgqa_sparql::PatternTerm::Term(t) = slot {
                if *t == surrogate {
                    *slot = kgqa_sparql::PatternTerm::Var(fold_var.clone());
                    replaced = true;
                }
            }
        }
    }
    if !replaced {
        return Err(SynthError::Internal {
            detail: "fold surrogate did not appear in the grounded query".into(),
        });
    }
    let alternation = values
        .iter()
        .map(|v| regex::escape(v.lexical_form()))
        .collect::<Vec<_>>()
        .join("|");
    query.filters.push(FilterExpr {
        var: fold_var,
        op: FilterOp::Regex,
        rhs: FilterRhs::Pattern(format!("^({alternation})$")),
    });
    let (query, repairs) = posthoc_decode(PosthocInput::Ast(query), slice)?;
    Ok(vec![SynthesizedQuery {
        query,
        repairs,
        seed: None,
    }])
}
