//! Bindings, answer sets and the W3C SPARQL results JSON codec.

use kgqa_rdf::Term;
use kgqa_sparql::{serialize_sparql, SparqlQuery, Variable};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::time::Duration;

/// One solution row: variable -> term. Unbound variables are absent.
pub type Binding = BTreeMap<Variable, Term>;

/// Canonical string form of a binding, used as the deterministic row order
/// in the absence of ORDER BY.
pub fn binding_key(binding: &Binding) -> String {
    let mut out = String::new();
    for (var, term) in binding {
        out.push_str(&format!("{var}={term}|"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rows {
    Solutions(Vec<Binding>),
    Boolean(bool),
}

impl Rows {
    pub fn solutions(&self) -> &[Binding] {
        match self {
            Rows::Solutions(rows) => rows,
            Rows::Boolean(_) => &[],
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Rows::Solutions(rows) => rows.len(),
            Rows::Boolean(_) => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Rows::Solutions(rows) => rows.is_empty(),
            Rows::Boolean(b) => !b,
        }
    }

    /// Multiset view for result comparison: sorted canonical row keys.
    pub fn multiset_key(&self) -> Vec<String> {
        match self {
            Rows::Solutions(rows) => {
                let mut keys: Vec<String> = rows.iter().map(binding_key).collect();
                keys.sort();
                keys
            }
            Rows::Boolean(b) => vec![format!("boolean={b}")],
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnswerSet {
    pub query: SparqlQuery,
    pub graph_id: String,
    pub rows: Rows,
    pub exec_time: Duration,
    pub truncated: bool,
    pub warnings: Vec<String>,
}

impl AnswerSet {
    /// Multiset equality of rows, ignoring order, timing and provenance.
    pub fn same_results(&self, other: &AnswerSet) -> bool {
        self.rows.multiset_key() == other.rows.multiset_key()
    }

    /// W3C SPARQL results JSON.
    pub fn to_results_json(&self) -> Value {
        match &self.rows {
            Rows::Boolean(b) => json!({ "head": {}, "boolean": b }),
            Rows::Solutions(rows) => {
                let vars: Vec<String> = self
                    .query
                    .projected_variables()
                    .iter()
                    .map(|v| v.name().to_string())
                    .collect();
                let bindings: Vec<Value> = rows
                    .iter()
                    .map(|row| {
                        let mut obj = Map::new();
                        for (var, term) in row {
                            obj.insert(var.name().to_string(), term_to_json(term));
                        }
                        Value::Object(obj)
                    })
                    .collect();
                json!({
                    "head": { "vars": vars },
                    "results": { "bindings": bindings }
                })
            }
        }
    }

    pub fn query_text(&self) -> String {
        serialize_sparql(&self.query)
    }
}

pub fn term_to_json(term: &Term) -> Value {
    match term {
        Term::Iri(iri) => json!({ "type": "uri", "value": iri }),
        Term::BlankNode(label) => json!({ "type": "bnode", "value": label }),
        Term::Literal {
            lexical,
            datatype,
            lang,
        } => {
            let mut obj = Map::new();
            obj.insert("type".into(), json!("literal"));
            obj.insert("value".into(), json!(lexical));
            if let Some(dt) = datatype {
                obj.insert("datatype".into(), json!(dt));
            }
            if let Some(lang) = lang {
                obj.insert("xml:lang".into(), json!(lang));
            }
            Value::Object(obj)
        }
    }
}

/// Decodes one results-JSON term object. Unknown `type` values map to plain
/// literals; the caller records a warning rather than failing.
pub fn term_from_json(value: &Value) -> Result<(Term, Option<String>), String> {
    let obj = value.as_object().ok_or("binding value is not an object")?;
    let kind = obj.get("type").and_then(Value::as_str).unwrap_or("");
    let text = obj
        .get("value")
        .and_then(Value::as_str)
        .ok_or("binding value lacks `value`")?;
    match kind {
        "uri" => Ok((Term::iri(text), None)),
        "bnode" => Ok((Term::blank(text), None)),
        "literal" | "typed-literal" => {
            let datatype = obj
                .get("datatype")
                .and_then(Value::as_str)
                .map(str::to_string);
            let lang = obj
                .get("xml:lang")
                .and_then(Value::as_str)
                .map(str::to_string);
            Ok((
                Term::Literal {
                    lexical: text.to_string(),
                    datatype,
                    lang,
                },
                None,
            ))
        }
        other => Ok((
            Term::literal(text),
            Some(format!("unknown term type `{other}` mapped to plain literal")),
        )),
    }
}

/// Decodes a full results document into rows.
pub fn rows_from_results_json(value: &Value) -> Result<(Rows, Vec<String>), String> {
    if let Some(b) = value.get("boolean").and_then(Value::as_bool) {
        return Ok((Rows::Boolean(b), Vec::new()));
    }
    let bindings = value
        .pointer("/results/bindings")
        .and_then(Value::as_array)
        .ok_or("missing results.bindings")?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for entry in bindings {
        let obj = entry.as_object().ok_or("binding row is not an object")?;
        let mut row = Binding::new();
        for (name, term_value) in obj {
            let (term, warning) = term_from_json(term_value)?;
            if let Some(w) = warning {
                warnings.push(w);
            }
            row.insert(Variable::new(name.clone()), term);
        }
        rows.push(row);
    }
    Ok((Rows::Solutions(rows), warnings))
}
