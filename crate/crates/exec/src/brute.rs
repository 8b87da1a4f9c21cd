//! Brute-force reference evaluation.
//!
//! Enumerates every assignment of triple patterns to stored triples and
//! keeps the consistent ones. Deliberately shares no join, filter or
//! modifier code with the indexed evaluator: this module is the oracle the
//! engine is checked against, so it trades speed for obviousness.

use crate::answer::{AnswerSet, Binding, Rows};
use kgqa_rdf::{vocab, Term, Triple, TripleStore};
use kgqa_sparql::{
    FilterExpr, FilterOp, FilterRhs, Order, PatternTerm, Projection, ProjectionTerm, QueryForm,
    SparqlQuery, TriplePattern, Variable,
};
use std::time::Instant;

const GUARD_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("brute-force enumeration would visit {candidates:.3e} candidate assignments (limit {limit:.0e})")]
pub struct GuardExceeded {
    pub candidates: f64,
    pub limit: f64,
}

pub fn brute_force_evaluate(
    query: &SparqlQuery,
    store: &TripleStore,
) -> Result<AnswerSet, GuardExceeded> {
    let started = Instant::now();
    let n = store.size() as f64;
    let total_patterns = query.pattern.all_patterns().count() as u32;
    let candidates = if total_patterns == 0 {
        1.0
    } else {
        n.max(1.0).powi(total_patterns as i32)
    };
    if candidates > GUARD_LIMIT {
        return Err(GuardExceeded {
            candidates,
            limit: GUARD_LIMIT,
        });
    }

    let mut rows = enumerate(&query.pattern.required, store, &Binding::new());
    for block in &query.pattern.optionals {
        let mut next = Vec::new();
        for row in rows {
            let extensions = enumerate(block, store, &row);
            if extensions.is_empty() {
                next.push(row);
            } else {
                next.extend(extensions);
            }
        }
        rows = next;
    }
    rows.retain(|row| query.filters.iter().all(|f| accepts(f, row)));

    let rows = match &query.form {
        QueryForm::Ask => {
            return Ok(AnswerSet {
                query: query.clone(),
                graph_id: store.graph_id().to_string(),
                rows: Rows::Boolean(!rows.is_empty()),
                exec_time: started.elapsed(),
                truncated: false,
                warnings: vec![],
            })
        }
        QueryForm::Select(projection) => {
            let mut rows = if query.has_aggregates() || !query.group_by.is_empty() {
                group_and_count(query, rows)
            } else {
                rows
            };
            // Sorting precedes projection; the sort key may be dropped.
            order(&mut rows, &query.order_by);
            let mut rows = if query.has_aggregates() || !query.group_by.is_empty() {
                rows
            } else {
                restrict(projection, query, rows)
            };
            if query.distinct {
                let mut unique: Vec<Binding> = Vec::new();
                for row in rows {
                    if !unique.contains(&row) {
                        unique.push(row);
                    }
                }
                rows = unique;
            }
            if query.order_by.is_none() {
                order(&mut rows, &None);
            }
            rows
        }
    };

    let before = rows.len() as u64;
    let rows: Vec<Binding> = match query.limit {
        Some(limit) => rows.into_iter().take(limit as usize).collect(),
        None => rows,
    };
    let truncated = query.limit.is_some_and(|l| before > l);

    Ok(AnswerSet {
        query: query.clone(),
        graph_id: store.graph_id().to_string(),
        rows: Rows::Solutions(rows),
        exec_time: started.elapsed(),
        truncated,
        warnings: vec![],
    })
}

/// Every consistent assignment of `patterns` to triples, odometer-style.
fn enumerate(patterns: &[TriplePattern], store: &TripleStore, seed: &Binding) -> Vec<Binding> {
    if patterns.is_empty() {
        return vec![seed.clone()];
    }
    let triples = store.triples();
    if triples.is_empty() {
        return Vec::new();
    }
    let k = patterns.len();
    let mut counters = vec![0usize; k];
    let mut out = Vec::new();
    loop {
        if let Some(binding) = try_assignment(patterns, &counters, triples, seed) {
            out.push(binding);
        }
        // Advance the odometer.
        let mut i = 0;
        loop {
            counters[i] += 1;
            if counters[i] < triples.len() {
                break;
            }
            counters[i] = 0;
            i += 1;
            if i == k {
                return out;
            }
        }
    }
}

fn try_assignment(
    patterns: &[TriplePattern],
    counters: &[usize],
    triples: &[Triple],
    seed: &Binding,
) -> Option<Binding> {
    let mut binding = seed.clone();
    for (pattern, &idx) in patterns.iter().zip(counters) {
        let triple = &triples[idx];
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
                PatternTerm::Var(v) => match binding.get(v) {
                    Some(existing) if existing != value => return None,
                    Some(_) => {}
                    None => {
                        binding.insert(v.clone(), value.clone());
                    }
                },
            }
        }
    }
    Some(binding)
}

fn numeric(term: &Term) -> Option<f64> {
    match term {
        Term::Literal {
            lexical,
            datatype: Some(dt),
            ..
        } if dt == vocab::XSD_INTEGER || dt == vocab::XSD_DECIMAL || dt == vocab::XSD_DOUBLE => {
            lexical.parse().ok()
        }
        _ => None,
    }
}

fn accepts(filter: &FilterExpr, row: &Binding) -> bool {
    let Some(term) = row.get(&filter.var) else {
        return false;
    };
    match (&filter.op, &filter.rhs) {
        (FilterOp::Regex, FilterRhs::Pattern(p)) => regex::Regex::new(p)
            .map(|re| re.is_match(term.lexical_form()))
            .unwrap_or(false),
        (FilterOp::LangEq, FilterRhs::LangTag(tag)) => matches!(
            term,
            Term::Literal { lang: Some(l), .. } if l.eq_ignore_ascii_case(tag)
        ),
        (op, FilterRhs::Term(rhs)) => match (numeric(term), numeric(rhs)) {
            (Some(a), Some(b)) => match op {
                FilterOp::Eq => a == b,
                FilterOp::Ne => a != b,
                FilterOp::Lt => a < b,
                FilterOp::Le => a <= b,
                FilterOp::Gt => a > b,
                FilterOp::Ge => a >= b,
                _ => false,
            },
            _ => {
                let (a, b) = (term.lexical_form(), rhs.lexical_form());
                match op {
                    FilterOp::Eq => term == rhs,
                    FilterOp::Ne => term != rhs,
                    FilterOp::Lt => a < b,
                    FilterOp::Le => a <= b,
                    FilterOp::Gt => a > b,
                    FilterOp::Ge => a >= b,
                    _ => false,
                }
            }
        },
        _ => false,
    }
}

fn group_and_count(query: &SparqlQuery, rows: Vec<Binding>) -> Vec<Binding> {
    let QueryForm::Select(Projection::Terms(terms)) = &query.form else {
        return rows;
    };
    let mut keys: Vec<Vec<Option<Term>>> = Vec::new();
    let mut members: Vec<Vec<Binding>> = Vec::new();
    for row in rows {
        let key: Vec<Option<Term>> = query.group_by.iter().map(|v| row.get(v).cloned()).collect();
        match keys.iter().position(|k| *k == key) {
            Some(i) => members[i].push(row),
            None => {
                keys.push(key);
                members.push(vec![row]);
            }
        }
    }
    if keys.is_empty() && query.group_by.is_empty() {
        keys.push(Vec::new());
        members.push(Vec::new());
    }
    let mut out = Vec::new();
    for (key, group) in keys.into_iter().zip(members) {
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
                    let mut seen: Vec<&Term> = Vec::new();
                    for m in &group {
                        if let Some(t) = m.get(input) {
                            if !seen.contains(&t) {
                                seen.push(t);
                            }
                        }
                    }
                    seen.len()
                } else {
                    group.iter().filter(|m| m.contains_key(input)).count()
                };
                row.insert(
                    alias.clone(),
                    Term::typed_literal(count.to_string(), vocab::XSD_INTEGER),
                );
            }
        }
        let keep: Vec<&Variable> = terms.iter().map(|t| t.output_var()).collect();
        row.retain(|v, _| keep.contains(&v));
        out.push(row);
    }
    out
}

fn restrict(projection: &Projection, query: &SparqlQuery, rows: Vec<Binding>) -> Vec<Binding> {
    let keep: Vec<Variable> = match projection {
        Projection::Star => query.pattern.variables(),
        Projection::Terms(terms) => terms.iter().map(|t| t.output_var().clone()).collect(),
    };
    rows.into_iter()
        .map(|mut row| {
            row.retain(|v, _| keep.contains(v));
            row
        })
        .collect()
}

fn render(row: &Binding) -> String {
    row.iter()
        .map(|(v, t)| format!("{v}={t}|"))
        .collect::<String>()
}

fn order(rows: &mut [Binding], order_by: &Option<(Variable, Order)>) {
    match order_by {
        Some((var, dir)) => rows.sort_by(|a, b| {
            let cmp = match (a.get(var), b.get(var)) {
                (Some(x), Some(y)) => match (numeric(x), numeric(y)) {
                    (Some(nx), Some(ny)) => nx.partial_cmp(&ny).unwrap_or(std::cmp::Ordering::Equal),
                    _ => {
                        fn rank(t: &Term) -> u8 {
                            match t {
                                Term::BlankNode(_) => 0,
                                Term::Iri(_) => 1,
                                Term::Literal { .. } => 2,
                            }
                        }
                        rank(x).cmp(&rank(y)).then_with(|| x.to_string().cmp(&y.to_string()))
                    }
                },
                (None, Some(_)) => std::cmp::Ordering::Less,
                (Some(_), None) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            };
            let cmp = match dir {
                Order::Asc => cmp,
                Order::Desc => cmp.reverse(),
            };
            cmp.then_with(|| render(a).cmp(&render(b)))
        }),
        None => rows.sort_by_key(render),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kgqa_rdf::build_store;
    use kgqa_sparql::parse_sparql;

    #[test]
    fn empty_store_yields_empty_rows() {
        let store = build_store("g", vec![]);
        let q = parse_sparql("SELECT ?x WHERE { ?x <http://ex/p> ?y }").unwrap();
        let answers = brute_force_evaluate(&q, &store).unwrap();
        assert!(answers.rows.solutions().is_empty());
    }

    #[test]
    fn ask_with_matching_triple_is_true() {
        let store = build_store(
            "g",
            vec![Triple::new(
                Term::iri("http://ex/a"),
                Term::iri("http://ex/p"),
                Term::literal("v"),
            )
            .unwrap()],
        );
        let q = parse_sparql("ASK { ?x <http://ex/p> ?y }").unwrap();
        assert_eq!(brute_force_evaluate(&q, &store).unwrap().rows, Rows::Boolean(true));
    }

    #[test]
    fn guard_trips_on_oversized_enumerations() {
        let triples: Vec<Triple> = (0..600)
            .map(|i| {
                Triple::new(
                    Term::iri(format!("http://ex/s{i}")),
                    Term::iri("http://ex/p"),
                    Term::iri(format!("http://ex/o{i}")),
                )
                .unwrap()
            })
            .collect();
        let store = build_store("g", triples);
        let q = parse_sparql(
            "SELECT ?a WHERE { ?a <http://ex/p> ?b . ?c <http://ex/p> ?d . ?e <http://ex/p> ?f }",
        )
        .unwrap();
        assert!(brute_force_evaluate(&q, &store).is_err());
    }
}
