//! The graph registry: one entry per knowledge graph with its access handle,
//! metadata document, schema slice, lazily refreshed embedding and utility
//! score. Registration and removal rebuild the IDF statistics and flag
//! embeddings stale; they are recomputed on the next retrieval.

use crate::embed::{embed_text, IdfStats, SparseVec};
use kgqa_rdf::{
    build_store, extract_schema, load_graph_file, schema_summary, SchemaSlice, TripleStore,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone)]
pub enum GraphAccess {
    Local(Arc<TripleStore>),
    Remote { url: String },
}

#[derive(Debug)]
pub struct RegistryEntry {
    pub graph_id: String,
    pub access: GraphAccess,
    /// Schema summary plus free-text domain labels from the manifest.
    pub metadata_doc: String,
    /// Ontology/description documents searched by the weak tier.
    pub sources: Vec<(String, String)>,
    pub slice: SchemaSlice,
    pub utility: f64,
    /// (idf version, vector); recomputed when the version falls behind.
    embedding: Mutex<Option<(u64, SparseVec)>>,
    source_embeddings: Mutex<Option<(u64, Vec<SparseVec>)>>,
}

impl RegistryEntry {
    pub fn embedding(&self, idf: &IdfStats, version: u64) -> SparseVec {
        let mut cached = self.embedding.lock().unwrap();
        match cached.as_ref() {
            Some((v, vec)) if *v == version => vec.clone(),
            _ => {
                let vec = embed_text(&self.metadata_doc, idf);
                *cached = Some((version, vec.clone()));
                vec
            }
        }
    }

    pub fn source_embeddings(&self, idf: &IdfStats, version: u64) -> Vec<SparseVec> {
        let mut cached = self.source_embeddings.lock().unwrap();
        match cached.as_ref() {
            Some((v, vecs)) if *v == version => vecs.clone(),
            _ => {
                let vecs: Vec<SparseVec> = self
                    .sources
                    .iter()
                    .map(|(_, text)| embed_text(text, idf))
                    .collect();
                *cached = Some((version, vecs.clone()));
                vecs
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegistryError {
    #[error("graph id `{0}` is already registered")]
    DuplicateGraphId(String),
    #[error("unknown graph `{0}`")]
    UnknownGraph(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("no viable graph for the subgoal")]
    NoViableGraph,
}

pub const INITIAL_UTILITY: f64 = 0.5;

#[derive(Debug, Default)]
pub struct Registry {
    entries: BTreeMap<String, RegistryEntry>,
    idf: IdfStats,
    idf_version: u64,
}

pub struct EntryInput {
    pub graph_id: String,
    pub access: GraphAccess,
    pub free_metadata: String,
    pub sources: Vec<(String, String)>,
    pub slice: SchemaSlice,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn graph_ids(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn entry(&self, graph_id: &str) -> Option<&RegistryEntry> {
        self.entries.get(graph_id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &RegistryEntry> {
        self.entries.values()
    }

    pub fn idf(&self) -> &IdfStats {
        &self.idf
    }

    pub fn idf_version(&self) -> u64 {
        self.idf_version
    }

    /// Registers a graph: the metadata document is the schema summary plus
    /// the manifest's free text. Existing entries keep their documents; only
    /// IDF statistics change, and embeddings refresh lazily.
    pub fn register(&mut self, input: EntryInput) -> Result<(), RegistryError> {
        if self.entries.contains_key(&input.graph_id) {
            return Err(RegistryError::DuplicateGraphId(input.graph_id));
        }
        let metadata_doc = format!("{}\n{}", schema_summary(&input.slice), input.free_metadata);
        let entry = RegistryEntry {
            graph_id: input.graph_id.clone(),
            access: input.access,
            metadata_doc,
            sources: input.sources,
            slice: input.slice,
            utility: INITIAL_UTILITY,
            embedding: Mutex::new(None),
            source_embeddings: Mutex::new(None),
        };
        self.entries.insert(input.graph_id, entry);
        self.rebuild_idf();
        Ok(())
    }

    pub fn remove(&mut self, graph_id: &str) -> Result<(), RegistryError> {
        if self.entries.remove(graph_id).is_none() {
            return Err(RegistryError::UnknownGraph(graph_id.to_string()));
        }
        self.rebuild_idf();
        Ok(())
    }

    fn rebuild_idf(&mut self) {
        let documents: Vec<&str> = self
            .entries
            .values()
            .flat_map(|e| {
                std::iter::once(e.metadata_doc.as_str())
                    .chain(e.sources.iter().map(|(_, text)| text.as_str()))
            })
            .collect();
        self.idf = IdfStats::from_documents(documents.into_iter());
        self.idf_version += 1;
    }

    /// Exponential moving average utility update, clamped to [0, 1].
    pub fn update_utility(
        &mut self,
        graph_id: &str,
        outcome: UtilityOutcome,
    ) -> Result<f64, RegistryError> {
        let entry = self
            .entries
            .get_mut(graph_id)
            .ok_or_else(|| RegistryError::UnknownGraph(graph_id.to_string()))?;
        let reward = match outcome {
            UtilityOutcome::VerifiedPass => 1.0,
            UtilityOutcome::VerifiedFail => 0.0,
            UtilityOutcome::EmptyResult => 0.25,
        };
        entry.utility = (0.9 * entry.utility + 0.1 * reward).clamp(0.0, 1.0);
        Ok(entry.utility)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilityOutcome {
    VerifiedPass,
    VerifiedFail,
    EmptyResult,
}

/// One manifest row. `kind: file` entries load a local `.nt`/`.ttl` graph;
/// `kind: endpoint` entries reference a SPARQL endpoint and require a local
/// `schema` snapshot file for slice extraction.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestEntry {
    pub graph_id: String,
    pub kind: ManifestKind,
    pub path: String,
    #[serde(default)]
    pub metadata: String,
    #[serde(default)]
    pub sources: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifestKind {
    File,
    Endpoint,
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, RegistryError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RegistryError::Manifest(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| RegistryError::Manifest(format!("{}: {e}", path.display())))
}

pub fn save_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<(), RegistryError> {
    let text = serde_json::to_string_pretty(entries)
        .map_err(|e| RegistryError::Manifest(e.to_string()))?;
    std::fs::write(path, text)
        .map_err(|e| RegistryError::Manifest(format!("{}: {e}", path.display())))
}

/// Builds a registry from a manifest. Relative paths resolve against the
/// manifest's directory.
pub fn registry_from_manifest(
    manifest: &[ManifestEntry],
    base_dir: &Path,
) -> Result<Registry, RegistryError> {
    let mut registry = Registry::new();
    for row in manifest {
        let resolve = |p: &str| -> PathBuf {
            let path = Path::new(p);
            if path.is_absolute() {
                path.to_path_buf()
            } else {
                base_dir.join(path)
            }
        };
        let (access, slice) = match row.kind {
            ManifestKind::File => {
                let triples = load_graph_file(&resolve(&row.path))
                    .map_err(|e| RegistryError::Manifest(e.to_string()))?;
                let store = Arc::new(build_store(row.graph_id.clone(), triples));
                let slice = extract_schema(&store);
                (GraphAccess::Local(store), slice)
            }
            ManifestKind::Endpoint => {
                let schema_path = row.schema.as_ref().ok_or_else(|| {
                    RegistryError::Manifest(format!(
                        "endpoint `{}` needs a local `schema` snapshot file",
                        row.graph_id
                    ))
                })?;
                let triples = load_graph_file(&resolve(schema_path))
                    .map_err(|e| RegistryError::Manifest(e.to_string()))?;
                let store = build_store(row.graph_id.clone(), triples);
                let slice = extract_schema(&store);
                (
                    GraphAccess::Remote {
                        url: row.path.clone(),
                    },
                    slice,
                )
            }
        };
        let mut sources = Vec::new();
        for source in &row.sources {
            let text = std::fs::read_to_string(resolve(source))
                .map_err(|e| RegistryError::Manifest(format!("{source}: {e}")))?;
            sources.push((source.clone(), text));
        }
        registry.register(EntryInput {
            graph_id: row.graph_id.clone(),
            access,
            free_metadata: row.metadata.clone(),
            sources,
            slice,
        })?;
    }
    Ok(registry)
}
