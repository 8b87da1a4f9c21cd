//! Two-tier graph selection: coarse lexical retrieval over metadata, then
//! schema-level alignment of the survivors, combined with downstream
//! utility into the allocation decision.

use crate::embed::{cosine, embed_text};
use crate::registry::{Registry, RegistryError};
use kgqa_nlu::Subgoal;
use kgqa_rdf::text::{token_jaccard, tokenize};
use kgqa_rdf::SchemaSlice;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Mutex;

pub const DEFAULT_WEAK_K: usize = 5;

/// Score-combination weights; they must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreWeights {
    pub weak: f64,
    pub strong: f64,
    pub utility: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            weak: 0.3,
            strong: 0.5,
            utility: 0.2,
        }
    }
}

impl ScoreWeights {
    pub fn valid(&self) -> bool {
        (self.weak + self.strong + self.utility - 1.0).abs() < 1e-9
            && self.weak >= 0.0
            && self.strong >= 0.0
            && self.utility >= 0.0
    }
}

/// Mention -> grounded IRI in one graph's schema slice.
pub type GroundingMap = BTreeMap<String, String>;

#[derive(Debug, Clone, Serialize)]
pub struct CandidateScore {
    pub graph_id: String,
    pub weak: f64,
    pub strong: f64,
    pub utility: f64,
    pub combined: f64,
    pub grounding: GroundingMap,
}

#[derive(Debug, Clone, Serialize)]
pub struct AllocationDecision {
    pub subgoal_id: usize,
    pub chosen_graph: String,
    /// Full candidate ranking, best first, kept for fallback retries.
    pub ranking: Vec<CandidateScore>,
}

impl AllocationDecision {
    pub fn chosen(&self) -> &CandidateScore {
        self.ranking
            .iter()
            .find(|c| c.graph_id == self.chosen_graph)
            .expect("chosen graph is in the ranking")
    }

    /// Candidates after the chosen one, for fallback retries.
    pub fn alternatives(&self) -> impl Iterator<Item = &CandidateScore> {
        self.ranking
            .iter()
            .filter(move |c| c.graph_id != self.chosen_graph)
    }
}

/// Weak tier: cosine between the subgoal's mention text and each entry's
/// metadata embedding, boosted by the best source-document match via a
/// noisy-OR (the score never drops below either component). Top-k survive.
pub fn weak_retrieve(subgoal: &Subgoal, registry: &Registry, k: usize) -> Vec<(String, f64)> {
    let version = registry.idf_version();
    let query = embed_text(&subgoal.mention_text(), registry.idf());
    let mut scored: Vec<(String, f64)> = registry
        .entries()
        .map(|entry| {
            let base = cosine(&query, &entry.embedding(registry.idf(), version));
            let best_source = entry
                .source_embeddings(registry.idf(), version)
                .iter()
                .map(|vec| cosine(&query, vec))
                .fold(0.0, f64::max);
            let boosted = 1.0 - (1.0 - base) * (1.0 - best_source);
            (entry.graph_id.clone(), boosted)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    scored.truncate(k.max(1));
    scored
}

/// Grounds one mention against a slice by label match: exact case-folded
/// label equality scores 1.0, token-overlap Jaccard >= 0.5 scores the
/// Jaccard value. Ties break toward the lexicographically smaller IRI.
pub fn ground_mention(mention: &str, slice: &SchemaSlice) -> Option<(String, f64)> {
    let mention_folded = mention.to_lowercase();
    let mention_tokens = tokenize(mention);
    let mut best: Option<(String, f64)> = None;
    for (iri, labels) in &slice.labels {
        for label in labels {
            let score = if label.to_lowercase() == mention_folded {
                1.0
            } else {
                let j = token_jaccard(&mention_tokens, &tokenize(label));
                if j >= 0.5 {
                    j
                } else {
                    continue;
                }
            };
            let better = match &best {
                None => true,
                Some((best_iri, best_score)) => {
                    score > *best_score || (score == *best_score && iri < best_iri)
                }
            };
            if better {
                best = Some((iri.clone(), score));
            }
        }
    }
    best
}

/// Strong tier: fraction of mentions groundable in the slice, scaled by a
/// domain-compatibility factor (1.0 when every grounded predicate's domain
/// constraints admit the grounded class, 0.5 otherwise).
pub fn strong_align(
    subgoal: &Subgoal,
    candidates: &[(String, f64)],
    registry: &Registry,
) -> Vec<(String, f64, GroundingMap)> {
    let mut out = Vec::new();
    for (graph_id, _) in candidates {
        let Some(entry) = registry.entry(graph_id) else {
            continue;
        };
        let slice = &entry.slice;
        let mentions = subgoal.all_mentions();
        let mut grounding = GroundingMap::new();
        for mention in &mentions {
            if let Some((iri, _)) = memoized_ground(registry, graph_id, slice, mention) {
                grounding.insert(mention.to_string(), iri);
            }
        }
        let fraction = if mentions.is_empty() {
            0.0
        } else {
            grounding.len() as f64 / mentions.len() as f64
        };
        let factor = compatibility_factor(&grounding, slice);
        out.push((graph_id.clone(), fraction * factor, grounding));
    }
    out.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    out
}

fn compatibility_factor(grounding: &GroundingMap, slice: &SchemaSlice) -> f64 {
    let predicates: Vec<&String> = grounding
        .values()
        .filter(|iri| slice.has_predicate(iri))
        .collect();
    let classes: Vec<&String> = grounding
        .values()
        .filter(|iri| slice.classes.contains_key(*iri))
        .collect();
    if predicates.is_empty() || classes.is_empty() {
        return 1.0;
    }
    for predicate in &predicates {
        if let Some(constraints) = slice.domains.get(*predicate) {
            let domains = constraints.effective();
            if domains.is_empty() {
                continue;
            }
            for class in &classes {
                let compatible = domains.iter().any(|d| slice.is_subclass_of(class, d));
                if !compatible {
                    return 0.5;
                }
            }
        }
    }
    1.0
}

// Grounding memo keyed by (graph, slice content hash, mention); a schema
// change invalidates entries by changing the hash.
type GroundingMemo = BTreeMap<(String, u64, String), Option<(String, f64)>>;
static GROUNDING_MEMO: Mutex<Option<GroundingMemo>> = Mutex::new(None);

fn memoized_ground(
    _registry: &Registry,
    graph_id: &str,
    slice: &SchemaSlice,
    mention: &str,
) -> Option<(String, f64)> {
    let key = (graph_id.to_string(), slice.content_hash(), mention.to_string());
    let mut memo = GROUNDING_MEMO.lock().unwrap();
    let map = memo.get_or_insert_with(BTreeMap::new);
    if let Some(hit) = map.get(&key) {
        return hit.clone();
    }
    let result = ground_mention(mention, slice);
    // Bounded memo; typical runs stay far below this.
    if map.len() < 65_536 {
        map.insert(key, result.clone());
    }
    result
}

/// Full allocation: weak tier, strong tier on the survivors, then the
/// weighted combination with utility. The complete ranking is recorded for
/// fallback. Errors with NoViableGraph when the registry is empty or every
/// combined score is zero.
pub fn allocate(
    subgoal: &Subgoal,
    registry: &Registry,
    weights: ScoreWeights,
    weak_k: usize,
) -> Result<AllocationDecision, RegistryError> {
    if registry.is_empty() {
        return Err(RegistryError::NoViableGraph);
    }
    let weak = weak_retrieve(subgoal, registry, weak_k);
    let strong = strong_align(subgoal, &weak, registry);
    let mut ranking: Vec<CandidateScore> = Vec::new();
    for (graph_id, weak_score) in &weak {
        let (strong_score, grounding) = strong
            .iter()
            .find(|(g, _, _)| g == graph_id)
            .map(|(_, s, g)| (*s, g.clone()))
            .unwrap_or((0.0, GroundingMap::new()));
        let utility = registry.entry(graph_id).map(|e| e.utility).unwrap_or(0.0);
        let combined =
            weights.weak * weak_score + weights.strong * strong_score + weights.utility * utility;
        ranking.push(CandidateScore {
            graph_id: graph_id.clone(),
            weak: *weak_score,
            strong: strong_score,
            utility,
            combined,
            grounding,
        });
    }
    ranking.sort_by(|a, b| {
        b.combined
            .partial_cmp(&a.combined)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.graph_id.cmp(&b.graph_id))
    });
    if ranking.iter().all(|c| c.combined == 0.0) {
        return Err(RegistryError::NoViableGraph);
    }
    Ok(AllocationDecision {
        subgoal_id: subgoal.id,
        chosen_graph: ranking[0].graph_id.clone(),
        ranking,
    })
}

/// Ablation fallback ranking: raw stemmed-token overlap between the
/// subgoal's mention text and each entry's metadata (best of metadata and
/// source documents). No schema awareness.
pub fn term_overlap_ranking(subgoal: &Subgoal, registry: &Registry) -> Vec<(String, usize)> {
    use std::collections::BTreeSet;
    let query: BTreeSet<String> = tokenize(&subgoal.mention_text()).into_iter().collect();
    let mut scored: Vec<(String, usize)> = registry
        .entries()
        .map(|entry| {
            let doc_overlap = |text: &str| -> usize {
                let tokens: BTreeSet<String> = tokenize(text).into_iter().collect();
                query.intersection(&tokens).count()
            };
            let best = std::iter::once(entry.metadata_doc.as_str())
                .chain(entry.sources.iter().map(|(_, t)| t.as_str()))
                .map(doc_overlap)
                .max()
                .unwrap_or(0);
            (entry.graph_id.clone(), best)
        })
        .collect();
    scored.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}
