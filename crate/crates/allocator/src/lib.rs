//! Hierarchical alignment allocation: a registry of knowledge graphs and
//! the two-tier retrieval (weak lexical filtering, strong schema alignment)
//! that routes each subgoal to its target graph.

pub mod embed;
pub mod registry;
pub mod retrieve;

pub use embed::{cosine, embed_text, IdfStats, SparseVec};
pub use registry::{
    load_manifest, registry_from_manifest, save_manifest, EntryInput, GraphAccess, ManifestEntry,
    ManifestKind, Registry, RegistryEntry, RegistryError, UtilityOutcome, INITIAL_UTILITY,
};
pub use retrieve::{
    allocate, ground_mention, strong_align, term_overlap_ranking, weak_retrieve,
    AllocationDecision, CandidateScore, GroundingMap, ScoreWeights, DEFAULT_WEAK_K,
};
