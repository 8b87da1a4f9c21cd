//! Canonical text rendering: prefixes sorted by name, one triple pattern per
//! line, deterministic whitespace. Structurally equal ASTs serialize to
//! byte-identical text, and `parse(serialize(q))` is structurally `q`.

use crate::ast::*;

pub fn serialize_sparql(query: &SparqlQuery) -> String {
    let mut out = String::new();
    for (name, iri) in &query.prefixes {
        out.push_str(&format!("PREFIX {name}: <{iri}>\n"));
    }
    match &query.form {
        QueryForm::Select(projection) => {
            out.push_str("SELECT ");
            if query.distinct {
                out.push_str("DISTINCT ");
            }
            match projection {
                Projection::Star => out.push('*'),
                Projection::Terms(terms) => {
                    let rendered: Vec<String> = terms
                        .iter()
                        .map(|t| match t {
                            ProjectionTerm::Var(v) => v.to_string(),
                            ProjectionTerm::Count {
                                input,
                                distinct,
                                alias,
                            } => {
                                if *distinct {
                                    format!("(COUNT(DISTINCT {input}) AS {alias})")
                                } else {
                                    format!("(COUNT({input}) AS {alias})")
                                }
                            }
                        })
                        .collect();
                    out.push_str(&rendered.join(" "));
                }
            }
            out.push('\n');
        }
        QueryForm::Ask => out.push_str("ASK\n"),
    }
    out.push_str("WHERE {\n");
    for p in &query.pattern.required {
        out.push_str(&format!("  {p} .\n"));
    }
    for block in &query.pattern.optionals {
        out.push_str("  OPTIONAL {\n");
        for p in block {
            out.push_str(&format!("    {p} .\n"));
        }
        out.push_str("  }\n");
    }
    for f in &query.filters {
        out.push_str(&format!("  {}\n", render_filter(f)));
    }
    out.push('}');
    if !query.group_by.is_empty() {
        let vars: Vec<String> = query.group_by.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("\nGROUP BY {}", vars.join(" ")));
    }
    if let Some((var, order)) = &query.order_by {
        let dir = match order {
            Order::Asc => "ASC",
            Order::Desc => "DESC",
        };
        out.push_str(&format!("\nORDER BY {dir}({var})"));
    }
    if let Some(limit) = query.limit {
        out.push_str(&format!("\nLIMIT {limit}"));
    }
    out.push('\n');
    out
}

fn render_filter(f: &FilterExpr) -> String {
    match (&f.op, &f.rhs) {
        (FilterOp::Regex, FilterRhs::Pattern(p)) => {
            format!("FILTER(REGEX({}, \"{}\"))", f.var, kgqa_rdf::model::escape_literal(p))
        }
        (FilterOp::LangEq, FilterRhs::LangTag(tag)) => {
            format!("FILTER(LANG({}) = \"{tag}\")", f.var)
        }
        (op, FilterRhs::Term(t)) => format!("FILTER({} {} {})", f.var, op.symbol(), t),
        // Unreachable for parser-produced ASTs; kept total for hand-built ones.
        (op, rhs) => format!("FILTER({} {} {rhs:?})", f.var, op.symbol()),
    }
}
