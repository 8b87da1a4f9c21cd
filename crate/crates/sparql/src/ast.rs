//! Query AST for the supported subset: SELECT/ASK over basic graph patterns
//! with OPTIONAL blocks, FILTER, DISTINCT, ORDER BY, LIMIT and
//! GROUP BY + COUNT.

use kgqa_rdf::Term;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(pub String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        Variable(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// A triple-pattern position: either a constant term or a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternTerm {
    Term(Term),
    Var(Variable),
}

impl PatternTerm {
    pub fn var(name: impl Into<String>) -> Self {
        PatternTerm::Var(Variable::new(name))
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }

    pub fn as_term(&self) -> Option<&Term> {
        match self {
            PatternTerm::Term(t) => Some(t),
            PatternTerm::Var(_) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, PatternTerm::Var(_))
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Term(t) => write!(f, "{t}"),
            PatternTerm::Var(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: PatternTerm, predicate: PatternTerm, object: PatternTerm) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.positions().into_iter().filter_map(PatternTerm::as_var)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// Required triple patterns plus zero or more OPTIONAL blocks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphPattern {
    pub required: Vec<TriplePattern>,
    pub optionals: Vec<Vec<TriplePattern>>,
}

impl GraphPattern {
    pub fn all_patterns(&self) -> impl Iterator<Item = &TriplePattern> {
        self.required
            .iter()
            .chain(self.optionals.iter().flatten())
    }

    pub fn variables(&self) -> Vec<Variable> {
        let mut seen = Vec::new();
        for p in self.all_patterns() {
            for v in p.variables() {
                if !seen.contains(v) {
                    seen.push(v.clone());
                }
            }
        }
        seen
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Regex,
    LangEq,
}

impl FilterOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            FilterOp::Eq => "=",
            FilterOp::Ne => "!=",
            FilterOp::Lt => "<",
            FilterOp::Le => "<=",
            FilterOp::Gt => ">",
            FilterOp::Ge => ">=",
            FilterOp::Regex => "REGEX",
            FilterOp::LangEq => "LANG=",
        }
    }
}

/// Right-hand side of a filter: a constant term for comparisons, a pattern
/// string for REGEX, or a language tag for LANG equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FilterRhs {
    Term(Term),
    Pattern(String),
    LangTag(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FilterExpr {
    pub var: Variable,
    pub op: FilterOp,
    pub rhs: FilterRhs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Asc,
    Desc,
}

/// A projection item: a plain variable or `(COUNT(?v) AS ?alias)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjectionTerm {
    Var(Variable),
    Count {
        input: Variable,
        distinct: bool,
        alias: Variable,
    },
}

impl ProjectionTerm {
    /// The variable this term binds in result rows.
    pub fn output_var(&self) -> &Variable {
        match self {
            ProjectionTerm::Var(v) => v,
            ProjectionTerm::Count { alias, .. } => alias,
        }
    }

    pub fn is_aggregate(&self) -> bool {
        matches!(self, ProjectionTerm::Count { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    Star,
    Terms(Vec<ProjectionTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryForm {
    Select(Projection),
    Ask,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparqlQuery {
    pub form: QueryForm,
    pub prefixes: BTreeMap<String, String>,
    pub pattern: GraphPattern,
    pub filters: Vec<FilterExpr>,
    pub distinct: bool,
    pub order_by: Option<(Variable, Order)>,
    pub limit: Option<u64>,
    pub group_by: Vec<Variable>,
}

impl SparqlQuery {
    pub fn select(projection: Projection, pattern: GraphPattern) -> Self {
        SparqlQuery {
            form: QueryForm::Select(projection),
            prefixes: BTreeMap::new(),
            pattern,
            filters: Vec::new(),
            distinct: false,
            order_by: None,
            limit: None,
            group_by: Vec::new(),
        }
    }

    pub fn ask(pattern: GraphPattern) -> Self {
        SparqlQuery {
            form: QueryForm::Ask,
            prefixes: BTreeMap::new(),
            pattern,
            filters: Vec::new(),
            distinct: false,
            order_by: None,
            limit: None,
            group_by: Vec::new(),
        }
    }

    pub fn is_ask(&self) -> bool {
        matches!(self.form, QueryForm::Ask)
    }

    /// Variables a SELECT projects, resolving `*` to the pattern variables in
    /// first-occurrence order. Empty for ASK.
    pub fn projected_variables(&self) -> Vec<Variable> {
        match &self.form {
            QueryForm::Ask => Vec::new(),
            QueryForm::Select(Projection::Star) => self.pattern.variables(),
            QueryForm::Select(Projection::Terms(terms)) => {
                terms.iter().map(|t| t.output_var().clone()).collect()
            }
        }
    }

    /// Aggregate projection terms, if any.
    pub fn aggregates(&self) -> Vec<&ProjectionTerm> {
        match &self.form {
            QueryForm::Select(Projection::Terms(terms)) => {
                terms.iter().filter(|t| t.is_aggregate()).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn has_aggregates(&self) -> bool {
        !self.aggregates().is_empty()
    }

    /// All constant terms appearing in triple patterns, in AST preorder
    /// (required patterns before optional blocks; subject, predicate, object
    /// within a pattern).
    pub fn constant_terms(&self) -> Vec<&Term> {
        self.pattern
            .all_patterns()
            .flat_map(|p| p.positions())
            .filter_map(PatternTerm::as_term)
            .collect()
    }

    /// Constant predicate IRIs in pattern order.
    pub fn constant_predicates(&self) -> Vec<&str> {
        self.pattern
            .all_patterns()
            .filter_map(|p| p.predicate.as_term())
            .filter_map(Term::as_iri)
            .collect()
    }
}
