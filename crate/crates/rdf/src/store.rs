//! Indexed in-memory triple store.
//!
//! Stores are immutable once built and safe to share across threads.

use crate::model::{Term, Triple};
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone)]
pub struct TripleStore {
    graph_id: String,
    triples: Vec<Triple>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_predicate: HashMap<Term, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
}

pub fn build_store(graph_id: impl Into<String>, triples: Vec<Triple>) -> TripleStore {
    let mut seen = HashSet::new();
    let mut deduped = Vec::new();
    for t in triples {
        if seen.insert(t.clone()) {
            deduped.push(t);
        }
    }
    let mut by_subject: HashMap<Term, Vec<usize>> = HashMap::new();
    let mut by_predicate: HashMap<Term, Vec<usize>> = HashMap::new();
    let mut by_object: HashMap<Term, Vec<usize>> = HashMap::new();
    for (idx, t) in deduped.iter().enumerate() {
        by_subject.entry(t.subject.clone()).or_default().push(idx);
        by_predicate.entry(t.predicate.clone()).or_default().push(idx);
        by_object.entry(t.object.clone()).or_default().push(idx);
    }
    TripleStore {
        graph_id: graph_id.into(),
        triples: deduped,
        by_subject,
        by_predicate,
        by_object,
    }
}

impl TripleStore {
    pub fn graph_id(&self) -> &str {
        &self.graph_id
    }

    /// Number of distinct triples in the store.
    pub fn size(&self) -> usize {
        self.triples.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    fn lookup<'a>(&'a self, index: &'a HashMap<Term, Vec<usize>>, term: &Term) -> impl Iterator<Item = &'a Triple> + 'a {
        index
            .get(term)
            .map(|ids| ids.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.triples[i])
    }

    pub fn with_subject<'a>(&'a self, term: &Term) -> impl Iterator<Item = &'a Triple> + 'a {
        self.lookup(&self.by_subject, term)
    }

    pub fn with_predicate<'a>(&'a self, term: &Term) -> impl Iterator<Item = &'a Triple> + 'a {
        self.lookup(&self.by_predicate, term)
    }

    pub fn with_object<'a>(&'a self, term: &Term) -> impl Iterator<Item = &'a Triple> + 'a {
        self.lookup(&self.by_object, term)
    }

    /// Count of triples that would match a (subject?, predicate?, object?)
    /// probe, estimated from the cheapest applicable index.
    pub fn candidate_count(
        &self,
        subject: Option<&Term>,
        predicate: Option<&Term>,
        object: Option<&Term>,
    ) -> usize {
        let mut best = self.triples.len();
        if let Some(s) = subject {
            best = best.min(self.by_subject.get(s).map_or(0, Vec::len));
        }
        if let Some(p) = predicate {
            best = best.min(self.by_predicate.get(p).map_or(0, Vec::len));
        }
        if let Some(o) = object {
            best = best.min(self.by_object.get(o).map_or(0, Vec::len));
        }
        best
    }

    /// All triples matching the given constant positions, scanned via the
    /// most selective index.
    pub fn matching<'a>(
        &'a self,
        subject: Option<&'a Term>,
        predicate: Option<&'a Term>,
        object: Option<&'a Term>,
    ) -> Vec<&'a Triple> {
        let candidates: Vec<&Triple> = match (subject, predicate, object) {
            (Some(s), _, _)
                if self.by_subject.get(s).map_or(0, Vec::len)
                    <= self.candidate_count(subject, predicate, object) =>
            {
                self.with_subject(s).collect()
            }
            (_, _, Some(o)) if object.is_some() => self.with_object(o).collect(),
            (_, Some(p), _) => self.with_predicate(p).collect(),
            _ => self.triples.iter().collect(),
        };
        candidates
            .into_iter()
            .filter(|t| {
                subject.is_none_or(|s| &t.subject == s)
                    && predicate.is_none_or(|p| &t.predicate == p)
                    && object.is_none_or(|o| &t.object == o)
            })
            .collect()
    }

    /// True when the term occurs anywhere in the store (any position).
    pub fn contains_term(&self, term: &Term) -> bool {
        self.by_subject.contains_key(term)
            || self.by_predicate.contains_key(term)
            || self.by_object.contains_key(term)
    }
}
