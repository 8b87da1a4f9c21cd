//! Lexical text embedding: TF-IDF over stemmed word tokens with cosine
//! similarity. The vocabulary is the registry corpus (metadata plus source
//! documents), so vectors are deterministic for a fixed registry state. The
//! embedder sits behind `embed_text` and can be swapped for a neural
//! alternative without touching retrieval.

use kgqa_rdf::text::tokenize;
use std::collections::{BTreeMap, BTreeSet};

pub type SparseVec = BTreeMap<String, f64>;

/// Document-frequency statistics over the registry corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdfStats {
    pub doc_count: usize,
    pub doc_frequency: BTreeMap<String, usize>,
}

impl IdfStats {
    pub fn from_documents<'a>(documents: impl Iterator<Item = &'a str>) -> Self {
        let mut doc_count = 0;
        let mut doc_frequency: BTreeMap<String, usize> = BTreeMap::new();
        for doc in documents {
            doc_count += 1;
            let distinct: BTreeSet<String> = tokenize(doc).into_iter().collect();
            for token in distinct {
                *doc_frequency.entry(token).or_insert(0) += 1;
            }
        }
        IdfStats {
            doc_count,
            doc_frequency,
        }
    }

    /// `ln(N / (1 + df)) + 1`, strictly positive for any df <= N.
    pub fn idf(&self, token: &str) -> f64 {
        let df = self.doc_frequency.get(token).copied().unwrap_or(0) as f64;
        let n = self.doc_count.max(1) as f64;
        (n / (1.0 + df)).ln() + 1.0
    }
}

/// TF-IDF weighted bag of stemmed tokens.
pub fn embed_text(text: &str, idf: &IdfStats) -> SparseVec {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for token in tokenize(text) {
        *counts.entry(token).or_insert(0.0) += 1.0;
    }
    counts
        .into_iter()
        .map(|(token, tf)| {
            let weight = tf * idf.idf(&token);
            (token, weight)
        })
        .collect()
}

pub fn cosine(a: &SparseVec, b: &SparseVec) -> f64 {
    let mut dot = 0.0;
    for (token, weight) in a {
        if let Some(other) = b.get(token) {
            dot += weight * other;
        }
    }
    let norm_a: f64 = a.values().map(|w| w * w).sum::<f64>().sqrt();
    let norm_b: f64 = b.values().map(|w| w * w).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        0.0
    } else {
        (dot / (norm_a * norm_b)).clamp(0.0, 1.0)
    }
}
