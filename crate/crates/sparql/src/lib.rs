//! AST, grammar, parser and canonical serializer for the supported SPARQL
//! subset — the workspace's single source of truth for query structure.
//!
//! The subset covers SELECT/ASK, basic graph patterns, OPTIONAL blocks,
//! FILTER with `= != < <= > >= REGEX LANG`, DISTINCT, ORDER BY, LIMIT and
//! GROUP BY with COUNT aggregates. UNION, subqueries, property paths and
//! CONSTRUCT are out of scope. Serializer output is SPARQL 1.1-compatible
//! text; REGEX patterns follow the `regex` crate dialect.

pub mod ast;
pub mod error;
mod lexer;
pub mod parser;
pub mod patterns;
pub mod serializer;

pub use ast::{
    FilterExpr, FilterOp, FilterRhs, GraphPattern, Order, PatternTerm, Projection,
    ProjectionTerm, QueryForm, SparqlQuery, TriplePattern, Variable,
};
pub use error::SparqlError;
pub use parser::parse_sparql;
pub use patterns::triple_patterns_of;
pub use serializer::serialize_sparql;

#[cfg(test)]
mod tests {
    use super::*;
    use kgqa_rdf::Term;

    #[test]
    fn minimal_select() {
        let q = parse_sparql("SELECT ?x WHERE { ?x a <http://ex/Actor> }").unwrap();
        assert_eq!(q.pattern.required.len(), 1);
        assert_eq!(q.projected_variables(), vec![Variable::new("x")]);
        assert_eq!(
            q.pattern.required[0].predicate,
            PatternTerm::Term(Term::iri(kgqa_rdf::vocab::RDF_TYPE))
        );
    }

    #[test]
    fn truncated_query_is_a_syntax_error() {
        let err = parse_sparql("SELECT ?x WHERE { ?x a").unwrap_err();
        assert!(matches!(err, SparqlError::Syntax { .. }), "{err:?}");
    }

    #[test]
    fn unbound_projection_is_rejected() {
        let err = parse_sparql("SELECT ?y WHERE { ?x a <http://ex/Actor> }").unwrap_err();
        assert_eq!(err, SparqlError::UnboundVariable(Variable::new("y")));
    }

    #[test]
    fn unbound_filter_variable_is_rejected() {
        let err =
            parse_sparql("SELECT ?x WHERE { ?x a <http://ex/A> . FILTER(?z > 3) }").unwrap_err();
        assert_eq!(err, SparqlError::UnboundVariable(Variable::new("z")));
    }

    #[test]
    fn undefined_prefix_is_named() {
        let err = parse_sparql("SELECT ?x WHERE { ?x ex:p ?y }").unwrap_err();
        assert_eq!(err, SparqlError::UndefinedPrefix("ex".into()));
    }

    #[test]
    fn prefixes_expand_in_patterns() {
        let q = parse_sparql("PREFIX ex: <http://ex/> SELECT ?x WHERE { ?x ex:p ex:o }").unwrap();
        assert_eq!(
            q.pattern.required[0].predicate,
            PatternTerm::Term(Term::iri("http://ex/p"))
        );
        assert_eq!(q.prefixes.get("ex"), Some(&"http://ex/".to_string()));
    }

    #[test]
    fn full_feature_round_trip() {
        let text = concat!(
            "PREFIX ex: <http://ex/>\n",
            "SELECT DISTINCT ?x (COUNT(?y) AS ?n)\n",
            "WHERE {\n",
            "  ?x ex:p ?y .\n",
            "  ?x a ex:Actor .\n",
            "  OPTIONAL { ?x ex:q ?z . }\n",
            "  FILTER(?y > 5)\n",
            "  FILTER(REGEX(?y, \"^ab\"))\n",
            "  FILTER(LANG(?z) = \"en\")\n",
            "}\n",
            "GROUP BY ?x\n",
            "ORDER BY DESC(?x)\n",
            "LIMIT 10\n"
        );
        let q = parse_sparql(text).unwrap();
        let rendered = serialize_sparql(&q);
        let reparsed = parse_sparql(&rendered).unwrap();
        assert_eq!(q, reparsed);
        // Canonicalization: serializing again is byte-identical.
        assert_eq!(rendered, serialize_sparql(&reparsed));
    }

    #[test]
    fn empty_prefix_map_emits_no_prefix_lines() {
        let q = parse_sparql("SELECT ?x WHERE { ?x a <http://ex/A> }").unwrap();
        assert!(!serialize_sparql(&q).contains("PREFIX"));
    }

    #[test]
    fn ask_round_trip() {
        let q = parse_sparql("ASK { <http://ex/a> <http://ex/p> \"v\" }").unwrap();
        assert!(q.is_ask());
        assert_eq!(parse_sparql(&serialize_sparql(&q)).unwrap(), q);
    }

    #[test]
    fn semicolon_and_comma_abbreviations() {
        let q = parse_sparql(
            "SELECT ?x WHERE { ?x <http://ex/p> \"1\", \"2\" ; <http://ex/q> ?y . }",
        )
        .unwrap();
        assert_eq!(q.pattern.required.len(), 3);
    }

    #[test]
    fn ungrouped_projection_with_aggregate_is_rejected() {
        let err = parse_sparql("SELECT ?x (COUNT(?y) AS ?n) WHERE { ?x <http://ex/p> ?y }")
            .unwrap_err();
        assert_eq!(err, SparqlError::UnboundVariable(Variable::new("x")));
    }

    #[test]
    fn grouped_projection_is_accepted() {
        let q = parse_sparql(
            "SELECT ?x (COUNT(?y) AS ?n) WHERE { ?x <http://ex/p> ?y } GROUP BY ?x",
        )
        .unwrap();
        assert_eq!(q.group_by, vec![Variable::new("x")]);
    }

    #[test]
    fn invalid_regex_is_a_syntax_error() {
        let err =
            parse_sparql("SELECT ?x WHERE { ?x <http://ex/p> ?y . FILTER(REGEX(?y, \"(\")) }")
                .unwrap_err();
        assert!(matches!(err, SparqlError::Syntax { .. }));
    }

    #[test]
    fn comparison_operators_lex_next_to_iris() {
        let q = parse_sparql(
            "SELECT ?x WHERE { ?x <http://ex/p> ?y . FILTER(?y <= 10) FILTER(?y < 12) }",
        )
        .unwrap();
        assert_eq!(q.filters.len(), 2);
        assert_eq!(q.filters[0].op, FilterOp::Le);
        assert_eq!(q.filters[1].op, FilterOp::Lt);
    }
}
