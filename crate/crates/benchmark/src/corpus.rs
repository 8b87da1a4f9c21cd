//! Benchmark corpus format: JSON Lines, one item per line.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GoldAnswer {
    /// SPARQL-results-JSON shaped rows: var name -> term object.
    pub rows: Vec<Value>,
    /// Graphs the answer draws on.
    pub graphs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tags {
    pub kind: String,
    pub graphs: Vec<String>,
    /// True when the item's required predicate exists in exactly one graph,
    /// making the gold allocation unambiguous.
    #[serde(default)]
    pub unique_provenance: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BenchmarkItem {
    pub id: String,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clarification_answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_query: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_answer: Option<GoldAnswer>,
    pub tags: Tags,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("item `{id}`: {message}")]
    Invalid { id: String, message: String },
    #[error("corpus is empty")]
    Empty,
}

impl BenchmarkItem {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.gold_query.is_none() && self.gold_answer.is_none() {
            return Err(CorpusError::Invalid {
                id: self.id.clone(),
                message: "at least one of gold_query/gold_answer is required".into(),
            });
        }
        if self.tags.kind == "cross-kg" && self.tags.graphs.len() < 2 {
            return Err(CorpusError::Invalid {
                id: self.id.clone(),
                message: "cross-kg items must list at least two graphs".into(),
            });
        }
        Ok(())
    }
}

pub fn load_corpus(path: &Path) -> Result<Vec<BenchmarkItem>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut items = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: BenchmarkItem =
            serde_json::from_str(line).map_err(|e| CorpusError::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        item.validate()?;
        items.push(item);
    }
    if items.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(items)
}

pub fn save_corpus(path: &Path, items: &[BenchmarkItem]) -> Result<(), CorpusError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("item serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
