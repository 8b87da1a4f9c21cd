//! The query template library: one skeleton per intent and arity, stored as
//! a versioned data file rather than code.

use kgqa_nlu::Intent;
use regex::Regex;
use serde::Deserialize;
use std::collections::BTreeSet;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Class,
    Predicate,
    Value,
    Operator,
    Direction,
    Variable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotDefault {
    /// Fill from the grounded domain of the template's first predicate.
    PredicateDomain,
    /// Fill with a fresh unprojected variable.
    Variable,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SlotSpec {
    pub name: String,
    pub kind: SlotKind,
    #[serde(default)]
    pub default: Option<SlotDefault>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct QueryTemplate {
    pub id: String,
    pub intent: Intent,
    pub arity: usize,
    #[serde(default)]
    pub dependent: bool,
    pub skeleton: String,
    pub slots: Vec<SlotSpec>,
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([A-Z][A-Z0-9_]*)\}").unwrap())
}

impl QueryTemplate {
    pub fn placeholders(&self) -> BTreeSet<String> {
        placeholder_re()
            .captures_iter(&self.skeleton)
            .map(|c| c[1].to_string())
            .collect()
    }

    pub fn slot(&self, name: &str) -> Option<&SlotSpec> {
        self.slots.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct TemplateLibrary {
    templates: Vec<QueryTemplate>,
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("template library failed to parse: {0}")]
    Parse(String),
    #[error("template `{id}`: placeholder set does not match slot spec ({detail})")]
    SlotMismatch { id: String, detail: String },
}

pub const DEFAULT_TEMPLATES_JSON: &str = include_str!("../templates/default.json");

impl TemplateLibrary {
    pub fn from_json(json: &str) -> Result<Self, TemplateError> {
        let templates: Vec<QueryTemplate> =
            serde_json::from_str(json).map_err(|e| TemplateError::Parse(e.to_string()))?;
        for template in &templates {
            let placeholders = template.placeholders();
            let declared: BTreeSet<String> =
                template.slots.iter().map(|s| s.name.clone()).collect();
            if placeholders != declared {
                return Err(TemplateError::SlotMismatch {
                    id: template.id.clone(),
                    detail: format!("skeleton {placeholders:?} vs slots {declared:?}"),
                });
            }
        }
        Ok(TemplateLibrary { templates })
    }

    pub fn default_library() -> Self {
        Self::from_json(DEFAULT_TEMPLATES_JSON).expect("embedded template library is valid")
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, TemplateError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| TemplateError::Parse(e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn find(&self, intent: Intent, arity: usize, dependent: bool) -> Option<&QueryTemplate> {
        self.templates
            .iter()
            .find(|t| t.intent == intent && t.arity == arity && t.dependent == dependent)
    }

    pub fn templates(&self) -> &[QueryTemplate] {
        &self.templates
    }
}
