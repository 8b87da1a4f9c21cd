//! The domain lexicon: surface forms mapped to schema hints.
//!
//! Matching is on stemmed tokens, so plural and camelCase variants of a
//! surface form hit the same entry. A surface form that maps to two or more
//! different targets is the ambiguity trigger for clarification.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconKind {
    Predicate,
    Class,
    Entity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub surface: String,
    pub kind: LexiconKind,
    pub hint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reading: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lexicon {
    pub entries: Vec<LexiconEntry>,
}

/// Simple token stemmer matching the one used for schema labels: lowercase,
/// split on non-alphanumerics and camelCase, strip plural endings.
fn stem_tokens(text: &str) -> Vec<String> {
    // Duplicated from the rdf text utilities to keep this crate free of the
    // rdf dependency; the rules are fixed and tested on both sides.
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if c.is_uppercase() && prev_lower && !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            prev_lower = c.is_lowercase() || c.is_numeric();
            current.extend(c.to_lowercase());
        } else {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            prev_lower = false;
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
        .into_iter()
        .map(|t| {
            if t.len() > 3 && t.ends_with("ies") {
                format!("{}y", &t[..t.len() - 3])
            } else if t.len() > 4 && t.ends_with("sses") {
                t[..t.len() - 2].to_string()
            } else if t.len() > 2 && t.ends_with('s') && !t.ends_with("ss") {
                t[..t.len() - 1].to_string()
            } else {
                t
            }
        })
        .collect()
}

impl Lexicon {
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).unwrap()
    }

    /// Entries whose surface tokens occur as a contiguous subsequence of the
    /// mention's tokens, in lexicon order.
    pub fn matches(&self, mention: &str) -> Vec<&LexiconEntry> {
        let mention_tokens = stem_tokens(mention);
        self.entries
            .iter()
            .filter(|entry| {
                let surface_tokens = stem_tokens(&entry.surface);
                !surface_tokens.is_empty()
                    && mention_tokens
                        .windows(surface_tokens.len().min(mention_tokens.len().max(1)))
                        .any(|w| w == surface_tokens.as_slice())
            })
            .collect()
    }

    /// Surfaces that match the mention with two or more distinct targets.
    /// Returns (surface, conflicting entries) for the first such surface.
    pub fn ambiguity_in<'a>(&'a self, mention: &str) -> Option<(String, Vec<&'a LexiconEntry>)> {
        let matches = self.matches(mention);
        let mut by_surface: Vec<(String, Vec<&LexiconEntry>)> = Vec::new();
        for entry in matches {
            let key: String = stem_tokens(&entry.surface).join(" ");
            match by_surface.iter_mut().find(|(s, _)| *s == key) {
                Some((_, entries)) => entries.push(entry),
                None => by_surface.push((key, vec![entry])),
            }
        }
        for (surface, entries) in by_surface {
            let mut hints: Vec<&str> = entries.iter().map(|e| e.hint.as_str()).collect();
            hints.dedup();
            if hints.len() > 1 {
                return Some((surface, entries));
            }
        }
        None
    }

    /// Best predicate hint for a mention: the first matching entry of
    /// predicate kind (lexicon order), if unambiguous.
    pub fn predicate_hint(&self, mention: &str) -> Option<&LexiconEntry> {
        if self.ambiguity_in(mention).is_some() {
            return None;
        }
        self.matches(mention)
            .into_iter()
            .find(|e| e.kind == LexiconKind::Predicate)
    }

    pub fn class_hint(&self, mention: &str) -> Option<&LexiconEntry> {
        if self.ambiguity_in(mention).is_some() {
            return None;
        }
        self.matches(mention)
            .into_iter()
            .find(|e| e.kind == LexiconKind::Class)
    }
}

/// The lexicon shipped with the synthetic graphs.
pub fn default_lexicon() -> Lexicon {
    Lexicon::from_json(DEFAULT_LEXICON_JSON).expect("embedded lexicon parses")
}

pub const DEFAULT_LEXICON_JSON: &str = include_str!("../data/lexicon.json");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lexicon_parses() {
        let lexicon = default_lexicon();
        assert!(lexicon.entries.len() >= 15);
    }

    #[test]
    fn plural_surface_matching() {
        let lexicon = default_lexicon();
        assert!(lexicon
            .matches("trade codes")
            .iter()
            .any(|e| e.surface == "trade code"));
        assert!(lexicon.matches("actors").iter().any(|e| e.surface == "actor"));
    }

    #[test]
    fn product_code_is_ambiguous() {
        let lexicon = default_lexicon();
        let (surface, entries) = lexicon.ambiguity_in("product code").unwrap();
        assert_eq!(surface, "product code");
        assert_eq!(entries.len(), 2);
    }

    #[test]
    fn cpa_code_is_unambiguous() {
        let lexicon = default_lexicon();
        assert!(lexicon.ambiguity_in("CPA code 011150").is_none());
        let hint = lexicon.predicate_hint("CPA code 011150").unwrap();
        assert!(hint.hint.ends_with("hasCpaCode"));
    }
}
