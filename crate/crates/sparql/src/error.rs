use crate::ast::Variable;

/// Parser diagnostics. Every input yields either an AST or one of these;
/// the parser never panics.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SparqlError {
    #[error("syntax error at line {line}, col {col}: expected {expected}, found `{found}`")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
        found: String,
    },
    #[error("variable {0} is projected or filtered but never bound in the pattern")]
    UnboundVariable(Variable),
    #[error("undefined prefix `{0}`")]
    UndefinedPrefix(String),
}

impl SparqlError {
    pub fn syntax(
        line: usize,
        col: usize,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> Self {
        SparqlError::Syntax {
            line,
            col,
            expected: expected.into(),
            found: found.into(),
        }
    }
}
