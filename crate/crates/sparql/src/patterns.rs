//! Triple-pattern extraction with canonical variable renaming, the basis of
//! the triple-level F1 metric. FILTER expressions contribute nothing.

use crate::ast::{PatternTerm, SparqlQuery, TriplePattern, Variable};
use std::collections::HashMap;

/// All required and optional triple patterns with variables renamed
/// `?v0, ?v1, ...` in first-occurrence order, returned sorted so that two
/// results compare as multisets. Invariant under any variable renaming of
/// the input query.
pub fn triple_patterns_of(query: &SparqlQuery) -> Vec<TriplePattern> {
    let mut renames: HashMap<String, String> = HashMap::new();
    let mut rename = |term: &PatternTerm| -> PatternTerm {
        match term {
            PatternTerm::Var(v) => {
                let next = format!("v{}", renames.len());
                let name = renames.entry(v.0.clone()).or_insert(next).clone();
                PatternTerm::Var(Variable(name))
            }
            PatternTerm::Term(t) => PatternTerm::Term(t.clone()),
        }
    };
    let mut patterns: Vec<TriplePattern> = query
        .pattern
        .required
        .iter()
        .chain(query.pattern.optionals.iter().flatten())
        .map(|p| TriplePattern::new(rename(&p.subject), rename(&p.predicate), rename(&p.object)))
        .collect();
    patterns.sort();
    patterns
}
