//! The four evaluation metrics: execution accuracy, query syntax
//! correctness, triple-pattern F1 and average token usage.

use kgqa_sparql::{parse_sparql, triple_patterns_of};
use serde_json::Value;

/// Execution accuracy: 1 iff the pipeline succeeded and the predicted rows
/// equal the gold rows as multisets. Supersets and subsets both score 0;
/// the answer set must be complete and correct.
pub fn score_ea(predicted: Option<&[Value]>, gold_rows: &[Value]) -> u8 {
    let Some(rows) = predicted else {
        return 0;
    };
    let mut predicted_keys: Vec<String> = rows.iter().map(canonical_row).collect();
    let mut gold_keys: Vec<String> = gold_rows.iter().map(canonical_row).collect();
    predicted_keys.sort();
    gold_keys.sort();
    u8::from(predicted_keys == gold_keys)
}

fn canonical_row(row: &Value) -> String {
    // Objects with sorted keys serialize deterministically through the
    // BTreeMap-backed Value, so the JSON text is a stable row key.
    let mut entries: Vec<(String, String)> = row
        .as_object()
        .map(|obj| {
            obj.iter()
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect()
        })
        .unwrap_or_default();
    entries.sort();
    format!("{entries:?}")
}

/// Query syntax correctness: 1 iff the text parses with zero diagnostics.
/// Binding and prefix diagnostics count as invalid.
pub fn score_qsc(query_text: &str) -> u8 {
    u8::from(parse_sparql(query_text).is_ok())
}

/// Triple-level F1 between two queries: multiset precision/recall over
/// their canonical triple patterns (variables renamed, FILTERs excluded).
/// Parse failure on either side scores 0.
pub fn score_tf1(predicted: &str, gold: &str) -> f64 {
    let (Ok(predicted), Ok(gold)) = (parse_sparql(predicted), parse_sparql(gold)) else {
        return 0.0;
    };
    let predicted_patterns = triple_patterns_of(&predicted);
    let gold_patterns = triple_patterns_of(&gold);
    if predicted_patterns.is_empty() && gold_patterns.is_empty() {
        return 0.0;
    }
    let tp = multiset_intersection(&predicted_patterns, &gold_patterns);
    let precision = if predicted_patterns.is_empty() {
        0.0
    } else {
        tp as f64 / predicted_patterns.len() as f64
    };
    let recall = if gold_patterns.is_empty() {
        0.0
    } else {
        tp as f64 / gold_patterns.len() as f64
    };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Pattern-count triple for micro-averaged pooling: (true positives,
/// predicted pattern count, gold pattern count). None when either side
/// fails to parse.
pub fn tf1_counts(predicted: &str, gold: &str) -> Option<(usize, usize, usize)> {
    let (Ok(predicted), Ok(gold)) = (parse_sparql(predicted), parse_sparql(gold)) else {
        return None;
    };
    let predicted_patterns = triple_patterns_of(&predicted);
    let gold_patterns = triple_patterns_of(&gold);
    let tp = multiset_intersection(&predicted_patterns, &gold_patterns);
    Some((tp, predicted_patterns.len(), gold_patterns.len()))
}

fn multiset_intersection<T: Ord + Clone>(a: &[T], b: &[T]) -> usize {
    let mut b_remaining: Vec<&T> = b.iter().collect();
    let mut count = 0;
    for item in a {
        if let Some(pos) = b_remaining.iter().position(|x| *x == item) {
            b_remaining.remove(pos);
            count += 1;
        }
    }
    count
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let variance =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    (mean, variance.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn tf1_identity_up_to_renaming_is_one() {
        let a = "SELECT ?a WHERE { ?a <http://ex/p> ?b . ?b <http://ex/q> ?c }";
        let b = "SELECT ?x WHERE { ?x <http://ex/p> ?y . ?y <http://ex/q> ?z }";
        assert_eq!(score_tf1(a, b), 1.0);
        assert_eq!(score_tf1(a, a), 1.0);
    }

    #[test]
    fn tf1_partial_overlap_hand_case() {
        // Predicted has one of gold's two patterns and nothing else:
        // P = 1, R = 0.5, F1 = 2/3.
        let predicted = "SELECT ?x WHERE { ?x <http://ex/p> ?y }";
        let gold = "SELECT ?x WHERE { ?x <http://ex/p> ?y . ?x <http://ex/q> ?z }";
        let f1 = score_tf1(predicted, gold);
        assert!((f1 - 2.0 / 3.0).abs() < 1e-12, "{f1}");
    }

    #[test]
    fn tf1_disjoint_is_zero() {
        let a = "SELECT ?x WHERE { ?x <http://ex/p> ?y }";
        let b = "SELECT ?x WHERE { ?x <http://ex/zzz> <http://ex/o> }";
        assert_eq!(score_tf1(a, b), 0.0);
    }

    #[test]
    fn tf1_parse_failure_is_zero() {
        assert_eq!(score_tf1("not sparql", "SELECT ?x WHERE { ?x ?p ?y }"), 0.0);
    }

    #[test]
    fn qsc_rejects_binding_diagnostics() {
        assert_eq!(score_qsc("SELECT ?x WHERE { ?x a <http://ex/Actor> }"), 1);
        assert_eq!(score_qsc("SELECT ?x WHERE { ?x a"), 0);
        // Valid grammar, unbound projection: stricter than pure syntax.
        assert_eq!(score_qsc("SELECT ?y WHERE { ?x a <http://ex/Actor> }"), 0);
    }

    #[test]
    fn ea_requires_exact_multiset_match() {
        let gold = vec![json!({"x": {"type": "uri", "value": "http://ex/a"}})];
        let exact = gold.clone();
        assert_eq!(score_ea(Some(&exact), &gold), 1);
        // Execution failure scores zero regardless of partial rows.
        assert_eq!(score_ea(None, &gold), 0);
        // A superset of the gold rows scores zero: completeness and
        // correctness both required.
        let superset = vec![
            json!({"x": {"type": "uri", "value": "http://ex/a"}}),
            json!({"x": {"type": "uri", "value": "http://ex/b"}}),
        ];
        assert_eq!(score_ea(Some(&superset), &gold), 0);
        let subset: Vec<Value> = vec![];
        assert_eq!(score_ea(Some(&subset), &gold), 0);
    }

    #[test]
    fn ea_ignores_row_order() {
        let gold = vec![
            json!({"x": {"type": "literal", "value": "1"}}),
            json!({"x": {"type": "literal", "value": "2"}}),
        ];
        let predicted = vec![gold[1].clone(), gold[0].clone()];
        assert_eq!(score_ea(Some(&predicted), &gold), 1);
    }
}
