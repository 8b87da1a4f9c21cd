//! Recursive-descent parser for the supported subset.

use crate::ast::*;
use crate::error::SparqlError;
use crate::lexer::{tokenize, SpannedToken, Token};
use kgqa_rdf::Term;
use std::collections::BTreeMap;

pub fn parse_sparql(text: &str) -> Result<SparqlQuery, SparqlError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let query = parser.parse_query()?;
    validate(&query)?;
    Ok(query)
}

struct Parser {
    tokens: Vec<SpannedToken>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &SpannedToken {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> SpannedToken {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> SparqlError {
        let t = self.peek();
        SparqlError::syntax(t.line, t.col, expected, t.token.describe())
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SparqlError> {
        match &self.peek().token {
            Token::Keyword(k) if k == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err(kw)),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().token, Token::Keyword(k) if k == kw)
    }

    fn expect(&mut self, token: Token, label: &str) -> Result<(), SparqlError> {
        if self.peek().token == token {
            self.bump();
            Ok(())
        } else {
            Err(self.err(label))
        }
    }

    fn parse_query(&mut self) -> Result<SparqlQuery, SparqlError> {
        let mut prefixes = BTreeMap::new();
        while self.at_keyword("PREFIX") {
            self.bump();
            let name = match self.bump() {
                SpannedToken {
                    token: Token::PrefixedName(p, l),
                    ..
                } if l.is_empty() => p,
                t => {
                    return Err(SparqlError::syntax(
                        t.line,
                        t.col,
                        "a prefix name ending in `:`",
                        t.token.describe(),
                    ))
                }
            };
            let iri = match self.bump() {
                SpannedToken {
                    token: Token::Iri(iri),
                    ..
                } => iri,
                t => {
                    return Err(SparqlError::syntax(
                        t.line,
                        t.col,
                        "an IRI",
                        t.token.describe(),
                    ))
                }
            };
            // Later declarations win; map keys stay unique.
            prefixes.insert(name, iri);
        }

        let mut query = if self.at_keyword("SELECT") {
            self.bump();
            let distinct = if self.at_keyword("DISTINCT") {
                self.bump();
                true
            } else {
                false
            };
            let projection = self.parse_projection(&prefixes)?;
            let (pattern, filters) = self.parse_where(&prefixes)?;
            let mut q = SparqlQuery::select(projection, pattern);
            q.distinct = distinct;
            q.filters = filters;
            self.parse_modifiers(&mut q)?;
            q
        } else if self.at_keyword("ASK") {
            self.bump();
            let (pattern, filters) = self.parse_where(&prefixes)?;
            let mut q = SparqlQuery::ask(pattern);
            q.filters = filters;
            q
        } else {
            return Err(self.err("SELECT or ASK"));
        };
        self.expect(Token::Eof, "end of input")?;
        query.prefixes = prefixes;
        Ok(query)
    }

    fn parse_projection(
        &mut self,
        prefixes: &BTreeMap<String, String>,
    ) -> Result<Projection, SparqlError> {
        if self.peek().token == Token::Star {
            self.bump();
            return Ok(Projection::Star);
        }
        let mut terms = Vec::new();
        loop {
            match self.peek().token.clone() {
                Token::Var(name) => {
                    self.bump();
                    terms.push(ProjectionTerm::Var(Variable::new(name)));
                }
                Token::LParen => {
                    self.bump();
                    self.expect_keyword("COUNT")?;
                    self.expect(Token::LParen, "(")?;
                    let distinct = if self.at_keyword("DISTINCT") {
                        self.bump();
                        true
                    } else {
                        false
                    };
                    let input = match self.bump() {
                        SpannedToken {
                            token: Token::Var(name),
                            ..
                        } => Variable::new(name),
                        t => {
                            return Err(SparqlError::syntax(
                                t.line,
                                t.col,
                                "a variable inside COUNT",
                                t.token.describe(),
                            ))
                        }
                    };
                    self.expect(Token::RParen, ")")?;
                    self.expect_keyword("AS")?;
                    let alias = match self.bump() {
                        SpannedToken {
                            token: Token::Var(name),
                            ..
                        } => Variable::new(name),
                        t => {
                            return Err(SparqlError::syntax(
                                t.line,
                                t.col,
                                "an alias variable",
                                t.token.describe(),
                            ))
                        }
                    };
                    self.expect(Token::RParen, ")")?;
                    terms.push(ProjectionTerm::Count {
                        input,
                        distinct,
                        alias,
                    });
                }
                _ => break,
            }
        }
        let _ = prefixes;
        if terms.is_empty() {
            return Err(self.err("a projection (`*`, variables or COUNT)"));
        }
        Ok(Projection::Terms(terms))
    }

    fn parse_where(
        &mut self,
        prefixes: &BTreeMap<String, String>,
    ) -> Result<(GraphPattern, Vec<FilterExpr>), SparqlError> {
        if self.at_keyword("WHERE") {
            self.bump();
        }
        self.expect(Token::LBrace, "{")?;
        let mut pattern = GraphPattern::default();
        let mut filters = Vec::new();
        loop {
            match self.peek().token.clone() {
                Token::RBrace => {
                    self.bump();
                    break;
                }
                Token::Keyword(k) if k == "OPTIONAL" => {
                    self.bump();
                    self.expect(Token::LBrace, "{")?;
                    let mut block = Vec::new();
                    loop {
                        if self.peek().token == Token::RBrace {
                            self.bump();
                            break;
                        }
                        self.parse_triples_same_subject(prefixes, &mut block)?;
                        if self.peek().token == Token::Dot {
                            self.bump();
                        }
                    }
                    pattern.optionals.push(block);
                }
                Token::Keyword(k) if k == "FILTER" => {
                    self.bump();
                    filters.push(self.parse_filter()?);
                }
                Token::Eof => return Err(self.err("`}`")),
                _ => {
                    self.parse_triples_same_subject(prefixes, &mut pattern.required)?;
                    if self.peek().token == Token::Dot {
                        self.bump();
                    }
                }
            }
        }
        Ok((pattern, filters))
    }

    fn parse_triples_same_subject(
        &mut self,
        prefixes: &BTreeMap<String, String>,
        out: &mut Vec<TriplePattern>,
    ) -> Result<(), SparqlError> {
        let subject = self.parse_pattern_term(prefixes, "a subject")?;
        loop {
            let predicate = self.parse_verb(prefixes)?;
            loop {
                let object = self.parse_pattern_term(prefixes, "an object")?;
                out.push(TriplePattern::new(
                    subject.clone(),
                    predicate.clone(),
                    object,
                ));
                if self.peek().token == Token::Comma {
                    self.bump();
                    continue;
                }
                break;
            }
            if self.peek().token == Token::Semicolon {
                self.bump();
                // Trailing `;` before `.` or `}` is allowed.
                if matches!(self.peek().token, Token::Dot | Token::RBrace) {
                    return Ok(());
                }
                continue;
            }
            return Ok(());
        }
    }

    fn parse_verb(
        &mut self,
        prefixes: &BTreeMap<String, String>,
    ) -> Result<PatternTerm, SparqlError> {
        if self.peek().token == Token::A {
            self.bump();
            return Ok(PatternTerm::Term(Term::iri(kgqa_rdf::vocab::RDF_TYPE)));
        }
        self.parse_pattern_term(prefixes, "a predicate")
    }

    fn parse_pattern_term(
        &mut self,
        prefixes: &BTreeMap<String, String>,
        what: &str,
    ) -> Result<PatternTerm, SparqlError> {
        match self.peek().token.clone() {
            Token::Var(name) => {
                self.bump();
                Ok(PatternTerm::var(name))
            }
            Token::Iri(iri) => {
                self.bump();
                Ok(PatternTerm::Term(Term::Iri(iri)))
            }
            Token::PrefixedName(p, l) => {
                let t = self.bump();
                match prefixes.get(&p) {
                    Some(ns) => Ok(PatternTerm::Term(Term::iri(format!("{ns}{l}")))),
                    None => {
                        let _ = t;
                        Err(SparqlError::UndefinedPrefix(p))
                    }
                }
            }
            Token::Literal(term) => {
                self.bump();
                Ok(PatternTerm::Term(term))
            }
            Token::Integer(n) => {
                self.bump();
                Ok(PatternTerm::Term(Term::typed_literal(
                    n.to_string(),
                    kgqa_rdf::vocab::XSD_INTEGER,
                )))
            }
            _ => Err(self.err(what)),
        }
    }

    fn parse_filter(&mut self) -> Result<FilterExpr, SparqlError> {
        self.expect(Token::LParen, "(")?;
        let expr = match self.peek().token.clone() {
            Token::Keyword(k) if k == "REGEX" => {
                self.bump();
                self.expect(Token::LParen, "(")?;
                let var = self.parse_filter_var()?;
                self.expect(Token::Comma, ",")?;
                let (pattern, line, col) = match self.bump() {
                    SpannedToken {
                        token: Token::Literal(Term::Literal { lexical, .. }),
                        line,
                        col,
                    } => (lexical, line, col),
                    t => {
                        return Err(SparqlError::syntax(
                            t.line,
                            t.col,
                            "a pattern string",
                            t.token.describe(),
                        ))
                    }
                };
                if let Err(e) = regex::Regex::new(&pattern) {
                    return Err(SparqlError::syntax(
                        line,
                        col,
                        "a valid regular expression",
                        e.to_string(),
                    ));
                }
                self.expect(Token::RParen, ")")?;
                FilterExpr {
                    var,
                    op: FilterOp::Regex,
                    rhs: FilterRhs::Pattern(pattern),
                }
            }
            Token::Keyword(k) if k == "LANG" => {
                self.bump();
                self.expect(Token::LParen, "(")?;
                let var = self.parse_filter_var()?;
                self.expect(Token::RParen, ")")?;
                self.expect(Token::Eq, "=")?;
                let tag = match self.bump() {
                    SpannedToken {
                        token: Token::Literal(Term::Literal { lexical, .. }),
                        ..
                    } => lexical,
                    t => {
                        return Err(SparqlError::syntax(
                            t.line,
                            t.col,
                            "a language tag string",
                            t.token.describe(),
                        ))
                    }
                };
                FilterExpr {
                    var,
                    op: FilterOp::LangEq,
                    rhs: FilterRhs::LangTag(tag),
                }
            }
            _ => {
                let var = self.parse_filter_var()?;
                let op = match self.bump().token {
                    Token::Eq => FilterOp::Eq,
                    Token::Ne => FilterOp::Ne,
                    Token::Lt => FilterOp::Lt,
                    Token::Le => FilterOp::Le,
                    Token::Gt => FilterOp::Gt,
                    Token::Ge => FilterOp::Ge,
                    _ => return Err(self.err("a comparison operator")),
                };
                let rhs = match self.bump() {
                    SpannedToken {
                        token: Token::Literal(term),
                        ..
                    } => FilterRhs::Term(term),
                    SpannedToken {
                        token: Token::Integer(n),
                        ..
                    } => FilterRhs::Term(Term::typed_literal(
                        n.to_string(),
                        kgqa_rdf::vocab::XSD_INTEGER,
                    )),
                    SpannedToken {
                        token: Token::Iri(iri),
                        ..
                    } => FilterRhs::Term(Term::Iri(iri)),
                    t => {
                        return Err(SparqlError::syntax(
                            t.line,
                            t.col,
                            "a constant term",
                            t.token.describe(),
                        ))
                    }
                };
                FilterExpr { var, op, rhs }
            }
        };
        self.expect(Token::RParen, ")")?;
        Ok(expr)
    }

    fn parse_filter_var(&mut self) -> Result<Variable, SparqlError> {
        match self.bump() {
            SpannedToken {
                token: Token::Var(name),
                ..
            } => Ok(Variable::new(name)),
            t => Err(SparqlError::syntax(
                t.line,
                t.col,
                "a variable",
                t.token.describe(),
            )),
        }
    }

    fn parse_modifiers(&mut self, query: &mut SparqlQuery) -> Result<(), SparqlError> {
        if self.at_keyword("GROUP") {
            self.bump();
            self.expect_keyword("BY")?;
            while let Token::Var(name) = self.peek().token.clone() {
                self.bump();
                query.group_by.push(Variable::new(name));
            }
            if query.group_by.is_empty() {
                return Err(self.err("grouping variables"));
            }
        }
        if self.at_keyword("ORDER") {
            self.bump();
            self.expect_keyword("BY")?;
            let direction = if self.at_keyword("ASC") {
                self.bump();
                Order::Asc
            } else if self.at_keyword("DESC") {
                self.bump();
                Order::Desc
            } else {
                Order::Asc
            };
            let parens = if self.peek().token == Token::LParen {
                self.bump();
                true
            } else {
                false
            };
            let var = self.parse_filter_var()?;
            if parens {
                self.expect(Token::RParen, ")")?;
            }
            query.order_by = Some((var, direction));
        }
        if self.at_keyword("LIMIT") {
            self.bump();
            match self.bump() {
                SpannedToken {
                    token: Token::Integer(n),
                    ..
                } => query.limit = Some(n),
                t => {
                    return Err(SparqlError::syntax(
                        t.line,
                        t.col,
                        "a non-negative integer",
                        t.token.describe(),
                    ))
                }
            }
        }
        Ok(())
    }
}

/// Binding validation: projected, aggregated, filtered and grouped variables
/// must all occur in the where pattern, and with grouping in play every
/// plain projected variable must be a grouping variable.
fn validate(query: &SparqlQuery) -> Result<(), SparqlError> {
    let pattern_vars = query.pattern.variables();
    let in_pattern = |v: &Variable| pattern_vars.contains(v);

    if let QueryForm::Select(Projection::Terms(terms)) = &query.form {
        let has_aggregates = terms.iter().any(ProjectionTerm::is_aggregate);
        for term in terms {
            match term {
                ProjectionTerm::Var(v) => {
                    if !in_pattern(v) {
                        return Err(SparqlError::UnboundVariable(v.clone()));
                    }
                    if (has_aggregates || !query.group_by.is_empty())
                        && !query.group_by.contains(v)
                    {
                        return Err(SparqlError::UnboundVariable(v.clone()));
                    }
                }
                ProjectionTerm::Count { input, .. } => {
                    if !in_pattern(input) {
                        return Err(SparqlError::UnboundVariable(input.clone()));
                    }
                }
            }
        }
    }
    for f in &query.filters {
        if !in_pattern(&f.var) {
            return Err(SparqlError::UnboundVariable(f.var.clone()));
        }
    }
    for g in &query.group_by {
        if !in_pattern(g) {
            return Err(SparqlError::UnboundVariable(g.clone()));
        }
    }
    if let Some((v, _)) = &query.order_by {
        if !in_pattern(v) {
            return Err(SparqlError::UnboundVariable(v.clone()));
        }
    }
    Ok(())
}
