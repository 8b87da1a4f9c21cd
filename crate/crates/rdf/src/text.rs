//! Label and mention tokenization shared by retrieval and grounding.
//!
//! Splits camelCase and punctuation, lowercases, and applies a light plural
//! stemmer so that `hasCodes` and "has code" normalize to the same tokens.

/// Lowercased, stemmed tokens of a label, mention, or IRI local name.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if c.is_uppercase() && prev_lower && !current.is_empty() {
                tokens.push(current.clone());
                current.clear();
            }
            prev_lower = c.is_lowercase() || c.is_numeric();
            current.extend(c.to_lowercase());
        } else {
            if !current.is_empty() {
                tokens.push(current.clone());
                current.clear();
            }
            prev_lower = false;
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens.into_iter().map(|t| stem(&t)).collect()
}

/// Strips common plural endings. Deliberately conservative: short tokens and
/// tokens ending in "ss" are left alone.
pub fn stem(token: &str) -> String {
    let t = token;
    if t.len() > 3 && t.ends_with("ies") {
        return format!("{}y", &t[..t.len() - 3]);
    }
    if t.len() > 4 && t.ends_with("sses") {
        return t[..t.len() - 2].to_string();
    }
    if t.len() > 2 && t.ends_with('s') && !t.ends_with("ss") {
        return t[..t.len() - 1].to_string();
    }
    t.to_string()
}

/// Jaccard overlap of the two token sets.
pub fn token_jaccard(a: &[String], b: &[String]) -> f64 {
    use std::collections::BTreeSet;
    let sa: BTreeSet<&String> = a.iter().collect();
    let sb: BTreeSet<&String> = b.iter().collect();
    if sa.is_empty() && sb.is_empty() {
        return 0.0;
    }
    let inter = sa.intersection(&sb).count() as f64;
    let union = sa.union(&sb).count() as f64;
    inter / union
}

/// The local name of an IRI: everything after the last `#`, `/` or `:`.
pub fn local_name(iri: &str) -> &str {
    let cut = iri
        .rfind(['#', '/'])
        .or_else(|| iri.rfind(':'))
        .map(|i| i + 1)
        .unwrap_or(0);
    &iri[cut..]
}

/// The namespace part of an IRI (complement of `local_name`).
pub fn namespace(iri: &str) -> &str {
    let local = local_name(iri);
    &iri[..iri.len() - local.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn camel_case_and_plural_normalization() {
        assert_eq!(tokenize("hasCodes"), vec!["ha", "code"]);
        assert_eq!(tokenize("has code"), vec!["ha", "code"]);
        assert_eq!(tokenize("trade codes"), vec!["trade", "code"]);
    }

    #[test]
    fn jaccard_of_equal_sets_is_one() {
        let a = tokenize("hasCodes");
        let b = tokenize("has code");
        assert_eq!(token_jaccard(&a, &b), 1.0);
    }

    #[test]
    fn jaccard_of_disjoint_sets_is_zero() {
        assert_eq!(token_jaccard(&tokenize("alpha"), &tokenize("beta")), 0.0);
    }

    #[test]
    fn local_name_extraction() {
        assert_eq!(local_name("http://ex/schema#hasCode"), "hasCode");
        assert_eq!(local_name("http://ex/hasCode"), "hasCode");
        assert_eq!(namespace("http://ex/schema#hasCode"), "http://ex/schema#");
    }
}
