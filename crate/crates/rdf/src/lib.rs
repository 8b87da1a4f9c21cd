//! RDF data model, graph ingestion, indexed in-memory triple stores and
//! schema-slice extraction.
//!
//! Graphs load from N-Triples (`.nt`) or a Turtle subset (`.ttl`); both
//! parse to the same [`Triple`] representation. A [`TripleStore`] indexes
//! one graph for pattern lookups, and [`extract_schema`] derives the
//! [`SchemaSlice`] (predicates, classes, hierarchy, domain/range
//! constraints, labels) that retrieval and query synthesis work against.
//!
//! Hierarchy and constraint extraction assume the RDFS vocabulary
//! (`rdfs:subClassOf`, `rdfs:domain`, `rdfs:range`, `rdfs:label`).

pub mod model;
pub mod ntriples;
pub mod schema;
pub mod store;
pub mod text;
pub mod turtle;

pub use model::{vocab, Term, Triple, TripleError};
pub use ntriples::{parse_ntriples, serialize_ntriples, ParseError};
pub use schema::{extract_schema, schema_summary, ConstraintSet, SchemaSlice};
pub use store::{build_store, TripleStore};
pub use turtle::{parse_turtle, TurtleError};

use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    NTriples { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Turtle { path: String, source: TurtleError },
    #[error("{path}: unsupported extension (expected .nt or .ttl)")]
    UnsupportedExtension { path: String },
}

/// Loads a graph file, dispatching on the `.nt` / `.ttl` extension.
pub fn load_graph_file(path: &Path) -> Result<Vec<Triple>, LoadError> {
    let display = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: display.clone(),
        source,
    })?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("nt") => parse_ntriples(&content).map_err(|source| LoadError::NTriples {
            path: display,
            source,
        }),
        Some("ttl") => parse_turtle(&content).map_err(|source| LoadError::Turtle {
            path: display,
            source,
        }),
        _ => Err(LoadError::UnsupportedExtension { path: display }),
    }
}
