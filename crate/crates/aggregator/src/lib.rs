//! Consensus aggregation: entity alignment across the per-subgoal answer
//! sets, fusion onto class representatives, conflict surfacing and the
//! deterministic natural-language rendering.

use kgqa_exec::{binding_key, term_to_json, Binding};
use kgqa_llm::{GenerationRequest, Role, RoleRule, TextBackend};
use kgqa_rdf::{vocab, Term, TripleStore};
use kgqa_sparql::Variable;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkMethod {
    IriEqual,
    SameasLink,
    LabelExact,
}

/// A member of an equivalence class: a term as seen in one graph.
pub type Member = (String, Term);

/// A recorded alignment link between two members.
pub type Link = (Member, Member, LinkMethod);

#[derive(Debug, Clone, Default)]
pub struct AlignmentTable {
    /// Disjoint classes, each with at least one member.
    pub classes: Vec<BTreeSet<Member>>,
    /// Methods recorded per linked pair.
    pub links: Vec<Link>,
}

impl AlignmentTable {
    /// The representative for a term: the lexicographically smallest IRI in
    /// its class. Terms outside any class represent themselves.
    pub fn representative(&self, graph_id: &str, term: &Term) -> Term {
        if !term.is_iri() {
            return term.clone();
        }
        let member = (graph_id.to_string(), term.clone());
        for class in &self.classes {
            if class.contains(&member) {
                return class
                    .iter()
                    .map(|(_, t)| t.clone())
                    .min_by(|a, b| a.to_string().cmp(&b.to_string()))
                    .unwrap_or_else(|| term.clone());
            }
        }
        term.clone()
    }
}

/// One subgoal's contribution to fusion.
#[derive(Debug, Clone)]
pub struct SubAnswer {
    pub subgoal_id: usize,
    pub graph_id: String,
    pub rows: Vec<Binding>,
    /// The upstream dependency row this answer was seeded with, if any.
    pub seed: Option<Binding>,
    /// (graph, subgoal) pairs contributing to this answer, upstream first.
    pub provenance: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AggregateError {
    #[error("every subgoal failed or was skipped; nothing to aggregate")]
    AllSubgoalsFailed,
}

/// Union-find over answer terms with three deterministic link rules applied
/// in order: identical IRI, owl:sameAs in either store, exact case-folded
/// rdfs:label match.
pub fn align_entities(
    answers: &[SubAnswer],
    stores: &BTreeMap<String, Arc<TripleStore>>,
) -> AlignmentTable {
    let mut members: BTreeSet<Member> = BTreeSet::new();
    for answer in answers {
        for row in &answer.rows {
            for term in row.values() {
                if term.is_iri() {
                    members.insert((answer.graph_id.clone(), term.clone()));
                }
            }
        }
        if let Some(seed) = &answer.seed {
            for term in seed.values() {
                if term.is_iri() {
                    // A seed carries its upstream graph in the provenance
                    // chain; the first entry is the origin.
                    let origin = answer
                        .provenance
                        .first()
                        .map(|(g, _)| g.clone())
                        .unwrap_or_else(|| answer.graph_id.clone());
                    members.insert((origin, term.clone()));
                }
            }
        }
    }
    let members: Vec<Member> = members.into_iter().collect();
    let mut parent: Vec<usize> = (0..members.len()).collect();

    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    let mut links: Vec<Link> = Vec::new();
    let union = |parent: &mut Vec<usize>,
                 links: &mut Vec<Link>,
                 a: usize,
                 b: usize,
                 method: LinkMethod,
                 members: &[Member]| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[rb.max(ra)] = rb.min(ra);
            links.push((members[a].clone(), members[b].clone(), method));
        }
    };

    // Rule 1: identical IRIs across graphs.
    for (i, left) in members.iter().enumerate() {
        for j in (i + 1)..members.len() {
            if left.1 == members[j].1 {
                union(&mut parent, &mut links, i, j, LinkMethod::IriEqual, &members);
            }
        }
    }

    // Rule 2: owl:sameAs links present in either member's store.
    let same_as = Term::iri(vocab::OWL_SAME_AS);
    let linked = |a: &Term, b: &Term| -> bool {
        stores.values().any(|store| {
            store
                .with_predicate(&same_as)
                .any(|t| (&t.subject == a && &t.object == b) || (&t.subject == b && &t.object == a))
        })
    };
    for i in 0..members.len() {
        for j in (i + 1)..members.len() {
            if members[i].1 != members[j].1 && linked(&members[i].1, &members[j].1) {
                union(&mut parent, &mut links, i, j, LinkMethod::SameasLink, &members);
            }
        }
    }

    // Rule 3: exact case-folded label match, labels read from each member's
    // own graph.
    let label = Term::iri(vocab::RDFS_LABEL);
    let labels_of = |member: &Member| -> BTreeSet<String> {
        stores
            .get(&member.0)
            .map(|store| {
                store
                    .with_subject(&member.1)
                    .filter(|t| t.predicate == label)
                    .filter_map(|t| match &t.object {
                        Term::Literal { lexical, .. } => Some(lexical.to_lowercase()),
                        _ => None,
                    })
                    .collect()
            })
            .unwrap_or_default()
    };
    let member_labels: Vec<BTreeSet<String>> = members.iter().map(labels_of).collect();
    for i in 0..members.len() {
        for j in (i + 1)..members.len() {
            if members[i].1 != members[j].1
                && !member_labels[i].is_empty()
                && member_labels[i].intersection(&member_labels[j]).next().is_some()
            {
                union(&mut parent, &mut links, i, j, LinkMethod::LabelExact, &members);
            }
        }
    }

    // Materialize classes.
    let mut by_root: BTreeMap<usize, BTreeSet<Member>> = BTreeMap::new();
    for (i, member) in members.iter().enumerate() {
        let root = find(&mut parent, i);
        by_root.entry(root).or_default().insert(member.clone());
    }
    AlignmentTable {
        classes: by_root.into_values().collect(),
        links,
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Conflict {
    pub variable: String,
    pub values: Vec<String>,
    pub graphs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ConsensusAnswer {
    pub rows: Vec<Binding>,
    pub answer_text: String,
    /// Per final row: the (graph, subgoal) pairs it traces to.
    pub provenance: Vec<Vec<(String, usize)>>,
    pub conflicts: Vec<Conflict>,
}

impl ConsensusAnswer {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (var, term) in row {
                    obj.insert(var.name().to_string(), term_to_json(term));
                }
                Value::Object(obj)
            })
            .collect();
        json!({
            "rows": rows,
            "answer_text": self.answer_text,
            "provenance": self.provenance,
            "conflicts": self.conflicts,
        })
    }
}

/// The deterministic sentence pattern: one clause per variable, values in
/// row order, source graphs sorted, clauses joined by semicolons.
pub fn render_answer(rows: &[Binding], provenance: &[Vec<(String, usize)>]) -> String {
    if rows.is_empty() {
        return "no results".to_string();
    }
    let mut var_values: BTreeMap<&Variable, Vec<String>> = BTreeMap::new();
    let mut var_graphs: BTreeMap<&Variable, BTreeSet<String>> = BTreeMap::new();
    for (row, row_provenance) in rows.iter().zip(provenance) {
        for (var, term) in row {
            let rendered = term.to_string();
            let values = var_values.entry(var).or_default();
            if !values.contains(&rendered) {
                values.push(rendered);
            }
            var_graphs
                .entry(var)
                .or_default()
                .extend(row_provenance.iter().map(|(g, _)| g.clone()));
        }
    }
    var_values
        .iter()
        .map(|(var, values)| {
            let graphs: Vec<String> = var_graphs
                .get(*var)
                .map(|g| g.iter().cloned().collect())
                .unwrap_or_default();
            format!(
                "{} is {} (source: {})",
                var,
                values.join(", "),
                graphs.join(", ")
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// The summarize rule for the deterministic backend: parses the structured
/// prompt and renders the fixed sentence pattern.
pub fn summarize_rule() -> RoleRule {
    Box::new(|prompt: &str| {
        let Some(idx) = prompt.find('{') else {
            return "no results".to_string();
        };
        let Ok(value) = serde_json::from_str::<Value>(&prompt[idx..]) else {
            return "no results".to_string();
        };
        let rows = decode_rows(&value);
        let provenance = decode_provenance(&value);
        render_answer(&rows, &provenance)
    })
}

fn decode_rows(value: &Value) -> Vec<Binding> {
    let Some(rows) = value.get("rows").and_then(Value::as_array) else {
        return Vec::new();
    };
    rows.iter()
        .filter_map(|row| {
            let obj = row.as_object()?;
            let mut binding = Binding::new();
            for (name, term) in obj {
                let (term, _) = kgqa_exec::answer::term_from_json(term).ok()?;
                binding.insert(Variable::new(name.clone()), term);
            }
            Some(binding)
        })
        .collect()
}

fn decode_provenance(value: &Value) -> Vec<Vec<(String, usize)>> {
    let Some(rows) = value.get("provenance").and_then(Value::as_array) else {
        return Vec::new();
    };
    rows.iter()
        .map(|row| {
            row.as_array()
                .map(|pairs| {
                    pairs
                        .iter()
                        .filter_map(|p| {
                            let pair = p.as_array()?;
                            Some((
                                pair.first()?.as_str()?.to_string(),
                                pair.get(1)?.as_u64()? as usize,
                            ))
                        })
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect()
}

/// Fusion: rows rewrite onto class representatives, seeds join in,
/// duplicates collapse (merging provenance), conflicts surface, and the
/// summarize backend produces the final sentence.
pub fn fuse(
    answers: &[SubAnswer],
    table: &AlignmentTable,
    backend: &dyn TextBackend,
) -> Result<ConsensusAnswer, AggregateError> {
    if answers.is_empty() {
        return Err(AggregateError::AllSubgoalsFailed);
    }

    // Rewrite and merge rows.
    let mut fused: Vec<(Binding, Vec<(String, usize)>)> = Vec::new();
    for answer in answers {
        let seed_origin = answer
            .provenance
            .first()
            .map(|(g, _)| g.clone())
            .unwrap_or_else(|| answer.graph_id.clone());
        for row in &answer.rows {
            let mut merged = Binding::new();
            if let Some(seed) = &answer.seed {
                for (var, term) in seed {
                    merged.insert(var.clone(), table.representative(&seed_origin, term));
                }
            }
            for (var, term) in row {
                merged.insert(var.clone(), table.representative(&answer.graph_id, term));
            }
            let mut provenance = answer.provenance.clone();
            if provenance.is_empty() {
                provenance.push((answer.graph_id.clone(), answer.subgoal_id));
            }
            match fused.iter_mut().find(|(existing, _)| *existing == merged) {
                Some((_, existing_provenance)) => {
                    for pair in provenance {
                        if !existing_provenance.contains(&pair) {
                            existing_provenance.push(pair);
                        }
                    }
                }
                None => fused.push((merged, provenance)),
            }
        }
    }
    fused.sort_by_key(|(row, _)| binding_key(row));
    for (_, provenance) in &mut fused {
        provenance.sort();
    }

    // Conflicts: rows sharing a seed where one variable takes different
    // values from different graphs.
    let mut conflicts: Vec<Conflict> = Vec::new();
    let mut by_seed: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (idx, answer) in answers.iter().enumerate() {
        if let Some(seed) = &answer.seed {
            by_seed.entry(binding_key(seed)).or_default().push(idx);
        }
    }
    for indices in by_seed.values() {
        if indices.len() < 2 {
            continue;
        }
        let mut per_var: BTreeMap<&Variable, BTreeMap<String, BTreeSet<String>>> = BTreeMap::new();
        for &idx in indices {
            let answer = &answers[idx];
            for row in &answer.rows {
                for (var, term) in row {
                    per_var
                        .entry(var)
                        .or_default()
                        .entry(table.representative(&answer.graph_id, term).to_string())
                        .or_default()
                        .insert(answer.graph_id.clone());
                }
            }
        }
        for (var, values) in per_var {
            if values.len() > 1 {
                let graphs: BTreeSet<String> =
                    values.values().flat_map(|g| g.iter().cloned()).collect();
                if graphs.len() > 1 {
                    conflicts.push(Conflict {
                        variable: var.to_string(),
                        values: values.keys().cloned().collect(),
                        graphs: graphs.into_iter().collect(),
                    });
                }
            }
        }
    }

    let rows: Vec<Binding> = fused.iter().map(|(row, _)| row.clone()).collect();
    let provenance: Vec<Vec<(String, usize)>> =
        fused.into_iter().map(|(_, provenance)| provenance).collect();

    // The summarize backend renders the sentence; an empty or refusal
    // response falls back to the local deterministic rendering.
    let prompt_payload = json!({
        "rows": rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (var, term) in row {
                    obj.insert(var.name().to_string(), term_to_json(term));
                }
                Value::Object(obj)
            })
            .collect::<Vec<_>>(),
        "provenance": provenance,
    });
    let request = GenerationRequest::new(
        Role::Summarize,
        format!("Summarize the fused answer rows. {prompt_payload}"),
    );
    let answer_text = match backend.generate(&request) {
        Ok(response) if !response.text.trim().is_empty() && !response.text.contains("refusal") => {
            response.text
        }
        _ => render_answer(&rows, &provenance),
    };

    Ok(ConsensusAnswer {
        rows,
        answer_text,
        provenance,
        conflicts,
    })
}
