//! Schema slices: the predicates, classes, hierarchy and domain/range
//! constraints extracted from one graph, plus the deterministic plain-text
//! summary used as retrieval metadata.

use crate::model::{vocab, Term};
use crate::store::TripleStore;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet, HashSet};

/// Domain or range constraint sets for one predicate. Declared constraints
/// come from `rdfs:domain`/`rdfs:range` statements and win on conflict;
/// observed constraints are inferred from instance data and marked as such.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pub declared: BTreeSet<String>,
    pub inferred: BTreeSet<String>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.declared.is_empty() && self.inferred.is_empty()
    }

    /// Declared classes when any exist, otherwise the inferred ones.
    pub fn effective(&self) -> &BTreeSet<String> {
        if self.declared.is_empty() {
            &self.inferred
        } else {
            &self.declared
        }
    }

    pub fn all(&self) -> BTreeSet<String> {
        self.declared.union(&self.inferred).cloned().collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemaSlice {
    pub graph_id: String,
    /// Predicate IRI -> usage count. Predicates that only appear in
    /// domain/range declarations are present with count 0.
    pub predicates: BTreeMap<String, usize>,
    /// Class IRI -> instance count (rdf:type statements).
    pub classes: BTreeMap<String, usize>,
    /// (child, parent) pairs from rdfs:subClassOf, self-loops removed.
    pub subclass_edges: BTreeSet<(String, String)>,
    /// Self-loops and other degenerate hierarchy statements, kept for audit.
    pub hierarchy_anomalies: BTreeSet<(String, String)>,
    pub domains: BTreeMap<String, ConstraintSet>,
    pub ranges: BTreeMap<String, ConstraintSet>,
    /// IRI -> label strings from rdfs:label (schema terms and instances).
    pub labels: BTreeMap<String, BTreeSet<String>>,
}

impl SchemaSlice {
    pub fn has_predicate(&self, iri: &str) -> bool {
        self.predicates.contains_key(iri)
    }

    pub fn predicate_usage(&self, iri: &str) -> usize {
        self.predicates.get(iri).copied().unwrap_or(0)
    }

    pub fn labels_of(&self, iri: &str) -> Option<&BTreeSet<String>> {
        self.labels.get(iri)
    }

    /// True when `child` reaches `parent` through subclass edges (reflexive).
    /// Cycles are tolerated: traversal is bounded by a visited set.
    pub fn is_subclass_of(&self, child: &str, parent: &str) -> bool {
        if child == parent {
            return true;
        }
        let mut visited = HashSet::new();
        let mut stack = vec![child];
        while let Some(current) = stack.pop() {
            if !visited.insert(current) {
                continue;
            }
            for (c, p) in &self.subclass_edges {
                if c == current {
                    if p == parent {
                        return true;
                    }
                    stack.push(p);
                }
            }
        }
        false
    }

    /// Whether an IRI appears anywhere in the slice (predicate, class,
    /// hierarchy node, or labeled term).
    pub fn contains_iri(&self, iri: &str) -> bool {
        self.predicates.contains_key(iri)
            || self.classes.contains_key(iri)
            || self.labels.contains_key(iri)
            || self
                .subclass_edges
                .iter()
                .any(|(c, p)| c == iri || p == iri)
    }

    /// FNV-1a hash over the canonical JSON export; changes whenever the
    /// slice content changes, which invalidates cached grounding decisions.
    pub fn content_hash(&self) -> u64 {
        let mut hash: u64 = 0xcbf29ce484222325;
        for byte in self.to_json().to_string().bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        hash
    }

    /// JSON export with stable key order.
    pub fn to_json(&self) -> Value {
        let constraint_map = |m: &BTreeMap<String, ConstraintSet>| {
            let mut out = serde_json::Map::new();
            for (pred, cs) in m {
                out.insert(
                    pred.clone(),
                    json!({
                        "declared": cs.declared.iter().collect::<Vec<_>>(),
                        "inferred": cs.inferred.iter().collect::<Vec<_>>(),
                    }),
                );
            }
            Value::Object(out)
        };
        json!({
            "graph_id": self.graph_id,
            "predicates": self.predicates,
            "classes": self.classes,
            "subclass_edges": self.subclass_edges.iter().map(|(c, p)| json!([c, p])).collect::<Vec<_>>(),
            "domains": constraint_map(&self.domains),
            "ranges": constraint_map(&self.ranges),
            "labels": self.labels.iter().map(|(k, v)| (k.clone(), json!(v.iter().collect::<Vec<_>>()))).collect::<serde_json::Map<_, _>>(),
        })
    }
}

/// Datatype IRI describing the kind of a literal object, used for observed
/// range inference. Plain literals count as xsd:string, language-tagged ones
/// as rdf:langString.
fn literal_kind(term: &Term) -> Option<String> {
    match term {
        Term::Literal { datatype, lang, .. } => Some(match (datatype, lang) {
            (_, Some(_)) => vocab::RDF_LANG_STRING.to_string(),
            (Some(dt), None) => dt.clone(),
            (None, None) => vocab::XSD_STRING.to_string(),
        }),
        _ => None,
    }
}

pub fn extract_schema(store: &TripleStore) -> SchemaSlice {
    let mut slice = SchemaSlice {
        graph_id: store.graph_id().to_string(),
        ..Default::default()
    };

    // rdf:type map, needed for observed domain/range inference.
    let mut types_of: BTreeMap<&Term, BTreeSet<&str>> = BTreeMap::new();
    let rdf_type = Term::iri(vocab::RDF_TYPE);
    for t in store.with_predicate(&rdf_type) {
        if let Term::Iri(class) = &t.object {
            types_of.entry(&t.subject).or_default().insert(class);
            *slice.classes.entry(class.clone()).or_insert(0) += 1;
        }
    }

    for t in store.triples() {
        let Term::Iri(pred) = &t.predicate else {
            continue;
        };
        *slice.predicates.entry(pred.clone()).or_insert(0) += 1;

        match pred.as_str() {
            p if p == vocab::RDFS_SUBCLASS_OF => {
                if let (Term::Iri(child), Term::Iri(parent)) = (&t.subject, &t.object) {
                    if child == parent {
                        slice
                            .hierarchy_anomalies
                            .insert((child.clone(), parent.clone()));
                    } else {
                        slice.subclass_edges.insert((child.clone(), parent.clone()));
                    }
                }
            }
            p if p == vocab::RDFS_DOMAIN => {
                if let (Term::Iri(target), Term::Iri(class)) = (&t.subject, &t.object) {
                    slice
                        .domains
                        .entry(target.clone())
                        .or_default()
                        .declared
                        .insert(class.clone());
                    slice.predicates.entry(target.clone()).or_insert(0);
                }
            }
            p if p == vocab::RDFS_RANGE => {
                if let (Term::Iri(target), Term::Iri(class)) = (&t.subject, &t.object) {
                    slice
                        .ranges
                        .entry(target.clone())
                        .or_default()
                        .declared
                        .insert(class.clone());
                    slice.predicates.entry(target.clone()).or_insert(0);
                }
            }
            p if p == vocab::RDFS_LABEL => {
                if let (Term::Iri(subject), Term::Literal { lexical, .. }) = (&t.subject, &t.object)
                {
                    slice
                        .labels
                        .entry(subject.clone())
                        .or_default()
                        .insert(lexical.clone());
                }
            }
            _ => {}
        }

        // Observed domain: classes of the subject.
        if let Some(classes) = types_of.get(&t.subject) {
            let entry = slice.domains.entry(pred.clone()).or_default();
            for class in classes {
                entry.inferred.insert((*class).to_string());
            }
        }
        // Observed range: classes of an IRI object, or the literal kind.
        if let Some(kind) = literal_kind(&t.object) {
            slice
                .ranges
                .entry(pred.clone())
                .or_default()
                .inferred
                .insert(kind);
        } else if let Some(classes) = types_of.get(&t.object) {
            let entry = slice.ranges.entry(pred.clone()).or_default();
            for class in classes {
                entry.inferred.insert((*class).to_string());
            }
        }
    }

    // Constraint maps may only mention known predicates.
    debug_assert!(slice
        .domains
        .keys()
        .chain(slice.ranges.keys())
        .all(|p| slice.predicates.contains_key(p)));

    slice
}

const SUMMARY_TOP: usize = 32;

/// Deterministic plain-text rendering of a slice: graph id, then the top
/// predicates and classes by usage with their labels, one item per line.
/// Identical slices produce byte-identical documents.
pub fn schema_summary(slice: &SchemaSlice) -> String {
    let mut out = String::new();
    out.push_str(&format!("graph {}\n", slice.graph_id));

    let mut ranked: Vec<(&String, &usize)> = slice.predicates.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    for (iri, count) in ranked.into_iter().take(SUMMARY_TOP) {
        out.push_str(&format!(
            "predicate {} count={} labels={}\n",
            iri,
            count,
            joined_labels(slice, iri)
        ));
    }

    let mut ranked: Vec<(&String, &usize)> = slice.classes.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    for (iri, count) in ranked.into_iter().take(SUMMARY_TOP) {
        out.push_str(&format!(
            "class {} count={} labels={}\n",
            iri,
            count,
            joined_labels(slice, iri)
        ));
    }
    out
}

fn joined_labels(slice: &SchemaSlice, iri: &str) -> String {
    match slice.labels.get(iri) {
        Some(labels) if !labels.is_empty() => labels.iter().cloned().collect::<Vec<_>>().join("|"),
        _ => "-".to_string(),
    }
}
