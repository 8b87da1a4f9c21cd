//! Index-driven local evaluation.
//!
//! Pipeline: join required patterns (left-deep, most selective first), left
//! join OPTIONAL blocks, apply filters, group/aggregate, project, DISTINCT,
//! ORDER BY, LIMIT. Row order without ORDER BY is the canonical serialized
//! binding order, so evaluation is fully deterministic.

use crate::answer::{binding_key, AnswerSet, Binding, Rows};
use kgqa_rdf::{vocab, Term, TripleStore};
use kgqa_sparql::{
    FilterExpr, FilterOp, FilterRhs, Order, PatternTerm, Projection, ProjectionTerm, QueryForm,
    SparqlQuery, TriplePattern, Variable,
};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::time::Instant;

pub fn evaluate_local(query: &SparqlQuery, store: &TripleStore) -> AnswerSet {
    let started = Instant::now();
    let mut rows = solve_bgp(&query.pattern.required, store, Binding::new());
    for block in &query.pattern.optionals {
        rows = left_join_block(rows, block, store);
    }
    rows.retain(|row| query.filters.iter().all(|f| filter_accepts(f, row)));

    let rows = match &query.form {
        QueryForm::Ask => {
            return AnswerSet {
                query: query.clone(),
                graph_id: store.graph_id().to_string(),
                rows: Rows::Boolean(!rows.is_empty()),
                exec_time: started.elapsed(),
                truncated: false,
                warnings: vec![],
            }
        }
        QueryForm::Select(projection) => {
            let mut rows = if query.has_aggregates() || !query.group_by.is_empty() {
                aggregate(query, rows)
            } else {
                rows
            };
            // ORDER BY runs before projection: the sort variable need not
            // be projected. Ties break on the full pre-projection row so
            // the final order stays deterministic.
            sort_rows(&mut rows, &query.order_by);
            let mut rows = if query.has_aggregates() || !query.group_by.is_empty() {
                rows
            } else {
                project(projection, query, rows)
            };
            if query.distinct {
                rows = dedup(rows);
            }
            if query.order_by.is_none() {
                sort_rows(&mut rows, &None);
            }
            rows
        }
    };

    let (rows, truncated) = apply_limit(rows, query.limit);
    AnswerSet {
        query: query.clone(),
        graph_id: store.graph_id().to_string(),
        rows: Rows::Solutions(rows),
        exec_time: started.elapsed(),
        truncated,
        warnings: vec![],
    }
}

/// Joins a basic graph pattern starting from one seed binding. Patterns are
/// reordered by ascending index-estimated candidate count; semantics are
/// unaffected by the order.
fn solve_bgp(patterns: &[TriplePattern], store: &TripleStore, seed: Binding) -> Vec<Binding> {
    let mut ordered: Vec<&TriplePattern> = patterns.iter().collect();
    ordered.sort_by_key(|p| {
        store.candidate_count(
            constant_of(&p.subject, &seed),
            constant_of(&p.predicate, &seed),
            constant_of(&p.object, &seed),
        )
    });
    let mut bindings = vec![seed];
    for pattern in ordered {
        let mut next = Vec::new();
        for binding in &bindings {
            let s = bound_term(&pattern.subject, binding);
            let p = bound_term(&pattern.predicate, binding);
            let o = bound_term(&pattern.object, binding);
            for triple in store.matching(s.as_ref(), p.as_ref(), o.as_ref()) {
                if let Some(extended) = unify(pattern, triple, binding) {
                    next.push(extended);
                }
            }
        }
        bindings = next;
        if bindings.is_empty() {
            break;
        }
    }
    bindings
}

fn left_join_block(
    rows: Vec<Binding>,
    block: &[TriplePattern],
    store: &TripleStore,
) -> Vec<Binding> {
    let mut out = Vec::new();
    for row in rows {
        let extensions = solve_bgp(block, store, row.clone());
        if extensions.is_empty() {
            out.push(row);
        } else {
            out.extend(extensions);
        }
    }
    out
}

fn constant_of<'a>(term: &'a PatternTerm, seed: &'a Binding) -> Option<&'a Term> {
    match term {
        PatternTerm::Term(t) => Some(t),
        PatternTerm::Var(v) => seed.get(v),
    }
}

fn bound_term(term: &PatternTerm, binding: &Binding) -> Option<Term> {
    match term {
        PatternTerm::Term(t) => Some(t.clone()),
        PatternTerm::Var(v) => binding.get(v).cloned(),
    }
}

fn unify(pattern: &TriplePattern, triple: &kgqa_rdf::Triple, binding: &Binding) -> Option<Binding> {
    let mut extended = binding.clone();
    for (slot, value) in [
        (&pattern.subject, &triple.subject),
        (&pattern.predicate, &triple.predicate),
        (&pattern.object, &triple.object),
    ] {
        match slot {
            PatternTerm::Term(t) => {
                if t != value {
                    return None;
                }
            }
            PatternTerm::Var(v) => match extended.get(v) {
                Some(existing) if existing != value => return None,
                Some(_) => {}
                None => {
                    extended.insert(v.clone(), value.clone());
                }
            },
        }
    }
    Some(extended)
}

/// Filter semantics: numeric comparison when both sides carry numeric XSD
/// datatypes, lexical otherwise; an unbound variable rejects the row.
pub fn filter_accepts(filter: &FilterExpr, row: &Binding) -> bool {
    let Some(term) = row.get(&filter.var) else {
        return false;
    };
    match (&filter.op, &filter.rhs) {
        (FilterOp::Regex, FilterRhs::Pattern(pattern)) => regex::Regex::new(pattern)
            .map(|re| re.is_match(term.lexical_form()))
            .unwrap_or(false),
        (FilterOp::LangEq, FilterRhs::LangTag(tag)) => match term {
            Term::Literal {
                lang: Some(lang), ..
            } => lang.eq_ignore_ascii_case(tag),
            _ => false,
        },
        (op, FilterRhs::Term(rhs)) => {
            if let (Some(a), Some(b)) = (term.numeric_value(), rhs.numeric_value()) {
                match op {
                    FilterOp::Eq => a == b,
                    FilterOp::Ne => a != b,
                    FilterOp::Lt => a < b,
                    FilterOp::Le => a <= b,
                    FilterOp::Gt => a > b,
                    FilterOp::Ge => a >= b,
                    _ => false,
                }
            } else {
                match op {
                    FilterOp::Eq => term == rhs,
                    FilterOp::Ne => term != rhs,
                    FilterOp::Lt => lexical_cmp(term, rhs) == Ordering::Less,
                    FilterOp::Le => lexical_cmp(term, rhs) != Ordering::Greater,
                    FilterOp::Gt => lexical_cmp(term, rhs) == Ordering::Greater,
                    FilterOp::Ge => lexical_cmp(term, rhs) != Ordering::Less,
                    _ => false,
                }
            }
        }
        _ => false,
    }
}

fn lexical_cmp(a: &Term, b: &Term) -> Ordering {
    a.lexical_form().cmp(b.lexical_form())
}

fn aggregate(query: &SparqlQuery, rows: Vec<Binding>) -> Vec<Binding> {
    let QueryForm::Select(Projection::Terms(terms)) = &query.form else {
        return rows;
    };
    // Group key: values of the GROUP BY variables (empty key = single group).
    let mut groups: Vec<(Vec<Option<Term>>, Vec<Binding>)> = Vec::new();
    for row in rows {
        let key: Vec<Option<Term>> = query
            .group_by
            .iter()
            .map(|v| row.get(v).cloned())
            .collect();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }
    if groups.is_empty() && query.group_by.is_empty() {
        // Aggregates over an empty solution set still yield one row.
        groups.push((Vec::new(), Vec::new()));
    }
    let mut out = Vec::new();
    for (key, members) in groups {
        let mut row = Binding::new();
        for (var, value) in query.group_by.iter().zip(key) {
            if let Some(value) = value {
                row.insert(var.clone(), value);
            }
        }
        for term in terms {
            if let ProjectionTerm::Count {
                input,
                distinct,
                alias,
            } = term
            {
                let count = if *distinct {
                    members
                        .iter()
                        .filter_map(|m| m.get(input))
                        .collect::<BTreeSet<_>>()
                        .len()
                } else {
                    members.iter().filter(|m| m.contains_key(input)).count()
                };
                row.insert(
                    alias.clone(),
                    Term::typed_literal(count.to_string(), vocab::XSD_INTEGER),
                );
            }
        }
        // Plain projected variables are grouping variables (validated at
        // parse time); anything else in the row is dropped.
        let keep: Vec<Variable> = terms.iter().map(|t| t.output_var().clone()).collect();
        row.retain(|v, _| keep.contains(v));
        out.push(row);
    }
    out
}

fn project(projection: &Projection, query: &SparqlQuery, rows: Vec<Binding>) -> Vec<Binding> {
    match projection {
        Projection::Star => {
            let vars = query.pattern.variables();
            rows.into_iter()
                .map(|mut row| {
                    row.retain(|v, _| vars.contains(v));
                    row
                })
                .collect()
        }
        Projection::Terms(terms) => {
            let vars: Vec<Variable> = terms.iter().map(|t| t.output_var().clone()).collect();
            rows.into_iter()
                .map(|mut row| {
                    row.retain(|v, _| vars.contains(v));
                    row
                })
                .collect()
        }
    }
}

fn dedup(rows: Vec<Binding>) -> Vec<Binding> {
    let mut seen = BTreeSet::new();
    rows.into_iter()
        .filter(|row| seen.insert(binding_key(row)))
        .collect()
}

/// Total order over terms for ORDER BY: numeric comparison when both sides
/// are numeric literals, then kind rank (blank < IRI < literal), then the
/// canonical rendering.
pub fn order_cmp(a: &Term, b: &Term) -> Ordering {
    if let (Some(x), Some(y)) = (a.numeric_value(), b.numeric_value()) {
        return x.partial_cmp(&y).unwrap_or(Ordering::Equal);
    }
    fn rank(t: &Term) -> u8 {
        match t {
            Term::BlankNode(_) => 0,
            Term::Iri(_) => 1,
            Term::Literal { .. } => 2,
        }
    }
    rank(a)
        .cmp(&rank(b))
        .then_with(|| a.to_string().cmp(&b.to_string()))
}

fn sort_rows(rows: &mut [Binding], order_by: &Option<(Variable, Order)>) {
    match order_by {
        Some((var, direction)) => rows.sort_by(|a, b| {
            let cmp = match (a.get(var), b.get(var)) {
                (Some(x), Some(y)) => order_cmp(x, y),
                (None, Some(_)) => Ordering::Less,
                (Some(_), None) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            };
            let cmp = match direction {
                Order::Asc => cmp,
                Order::Desc => cmp.reverse(),
            };
            cmp.then_with(|| binding_key(a).cmp(&binding_key(b)))
        }),
        None => rows.sort_by_key(binding_key),
    }
}

fn apply_limit(rows: Vec<Binding>, limit: Option<u64>) -> (Vec<Binding>, bool) {
    match limit {
        Some(limit) if (rows.len() as u64) > limit => {
            (rows.into_iter().take(limit as usize).collect(), true)
        }
        _ => (rows, false),
    }
}
