//! Randomized equivalence between the indexed evaluator and the brute-force
//! reference, plus the monotonicity and limit properties.

use kgqa_exec::{brute_force_evaluate, evaluate_local};
use kgqa_rdf::{build_store, vocab, Term, Triple, TripleStore};
use kgqa_sparql::{
    FilterExpr, FilterOp, FilterRhs, GraphPattern, PatternTerm, Projection, SparqlQuery,
    TriplePattern,
};

struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next() % n.max(1) as u64) as usize
    }
}

fn random_store(rng: &mut SplitMix64, max_triples: usize) -> TripleStore {
    let n = rng.below(max_triples + 1);
    let mut triples = Vec::with_capacity(n);
    for _ in 0..n {
        let s = Term::iri(format!("http://ex/s{}", rng.below(12)));
        let p = Term::iri(format!("http://ex/p{}", rng.below(5)));
        let o = match rng.below(3) {
            0 => Term::iri(format!("http://ex/s{}", rng.below(12))),
            1 => Term::literal(format!("v{}", rng.below(8))),
            _ => Term::typed_literal(rng.below(50).to_string(), vocab::XSD_INTEGER),
        };
        triples.push(Triple::new(s, p, o).unwrap());
    }
    build_store("g", triples)
}

fn random_query(rng: &mut SplitMix64, max_patterns: usize) -> SparqlQuery {
    let vars = ["a", "b", "c", "d"];
    let term = |rng: &mut SplitMix64| match rng.below(5) {
        0 | 1 => PatternTerm::var(vars[rng.below(vars.len())]),
        2 => PatternTerm::Term(Term::iri(format!("http://ex/s{}", rng.below(12)))),
        3 => PatternTerm::Term(Term::literal(format!("v{}", rng.below(8)))),
        _ => PatternTerm::Term(Term::typed_literal(
            rng.below(50).to_string(),
            vocab::XSD_INTEGER,
        )),
    };
    let n_patterns = 1 + rng.below(max_patterns);
    let mut required = Vec::new();
    for _ in 0..n_patterns {
        let subject = match rng.below(3) {
            0 => PatternTerm::Term(Term::iri(format!("http://ex/s{}", rng.below(12)))),
            _ => PatternTerm::var(vars[rng.below(vars.len())]),
        };
        let predicate = match rng.below(4) {
            0 => PatternTerm::var(vars[rng.below(vars.len())]),
            _ => PatternTerm::Term(Term::iri(format!("http://ex/p{}", rng.below(5)))),
        };
        required.push(TriplePattern::new(subject, predicate, term(rng)));
    }
    let pattern = GraphPattern {
        required,
        optionals: vec![],
    };
    let mut query = SparqlQuery::select(Projection::Star, pattern);
    if rng.below(2) == 0 {
        // One filter over a variable that occurs in the pattern.
        let pattern_vars = query.pattern.variables();
        if !pattern_vars.is_empty() {
            let var = pattern_vars[rng.below(pattern_vars.len())].clone();
            let op = [
                FilterOp::Eq,
                FilterOp::Ne,
                FilterOp::Lt,
                FilterOp::Gt,
                FilterOp::Le,
                FilterOp::Ge,
            ][rng.below(6)];
            let rhs = match rng.below(2) {
                0 => FilterRhs::Term(Term::typed_literal(
                    rng.below(50).to_string(),
                    vocab::XSD_INTEGER,
                )),
                _ => FilterRhs::Term(Term::literal(format!("v{}", rng.below(8)))),
            };
            query.filters.push(FilterExpr { var, op, rhs });
        }
    }
    if rng.below(4) == 0 {
        query.distinct = true;
    }
    if rng.below(4) == 0 {
        query.limit = Some(rng.below(6) as u64);
    }
    let pattern_vars = query.pattern.variables();
    if rng.below(3) == 0 && !pattern_vars.is_empty() {
        // ORDER BY a pattern variable, possibly one the projection drops.
        let var = pattern_vars[rng.below(pattern_vars.len())].clone();
        let direction = if rng.below(2) == 0 {
            kgqa_sparql::Order::Asc
        } else {
            kgqa_sparql::Order::Desc
        };
        query.order_by = Some((var, direction));
    }
    if rng.below(3) == 0 && !pattern_vars.is_empty() {
        // Project a strict subset of the pattern variables.
        let keep = 1 + rng.below(pattern_vars.len());
        let terms = pattern_vars
            .iter()
            .take(keep)
            .map(|v| kgqa_sparql::ProjectionTerm::Var(v.clone()))
            .collect();
        query.form = kgqa_sparql::QueryForm::Select(Projection::Terms(terms));
    }
    query
}

#[test]
fn indexed_evaluator_matches_brute_force() {
    let mut rng = SplitMix64(0xabcdef);
    for round in 0..300 {
        let store = random_store(&mut rng, 60);
        let query = random_query(&mut rng, 3);
        let fast = evaluate_local(&query, &store);
        let slow = brute_force_evaluate(&query, &store).unwrap();
        assert!(
            fast.same_results(&slow),
            "round {round}: divergence on {}",
            kgqa_sparql::serialize_sparql(&query)
        );
        assert_eq!(fast.truncated, slow.truncated, "round {round}: truncated flag");
    }
}

#[test]
fn bgp_results_are_monotone_under_store_growth() {
    let mut rng = SplitMix64(0x1234);
    for _ in 0..100 {
        let store = random_store(&mut rng, 40);
        let mut query = random_query(&mut rng, 2);
        // Plain BGP monotonicity: no filter, no limit, no distinct.
        query.filters.clear();
        query.limit = None;
        query.distinct = false;
        let before = evaluate_local(&query, &store);
        let mut triples = store.triples().to_vec();
        triples.push(
            Triple::new(
                Term::iri(format!("http://ex/s{}", rng.below(12))),
                Term::iri(format!("http://ex/p{}", rng.below(5))),
                Term::literal(format!("v{}", rng.below(8))),
            )
            .unwrap(),
        );
        let grown = build_store("g", triples);
        let after = evaluate_local(&query, &grown);
        let before_keys = before.rows.multiset_key();
        let mut after_keys = after.rows.multiset_key();
        for key in before_keys {
            match after_keys.iter().position(|k| *k == key) {
                Some(i) => {
                    after_keys.remove(i);
                }
                None => panic!("row lost after adding a triple"),
            }
        }
    }
}

#[test]
fn limit_returns_min_and_flags_truncation() {
    let mut rng = SplitMix64(0x77);
    for _ in 0..50 {
        let store = random_store(&mut rng, 40);
        let mut query = random_query(&mut rng, 2);
        query.limit = None;
        let full = evaluate_local(&query, &store).rows.solutions().len() as u64;
        let k = rng.below(8) as u64;
        query.limit = Some(k);
        let limited = evaluate_local(&query, &store);
        assert_eq!(limited.rows.solutions().len() as u64, full.min(k));
        assert_eq!(limited.truncated, full > k);
    }
}
