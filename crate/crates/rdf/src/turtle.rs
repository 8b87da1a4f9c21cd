//! Turtle subset reader.
//!
//! Supported: `@prefix` directives, prefixed names, the `a` keyword, `;` and
//! `,` abbreviations, plain/typed/language-tagged literals, blank-node labels
//! and bare integer/decimal shorthand. This is deliberately not a full Turtle
//! grammar; see the crate docs for the subset contract.

use crate::model::{vocab, Term, Triple};
use crate::ntriples::BlankScope;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TurtleError {
    #[error("line {line}, col {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}, col {col}: undefined prefix `{prefix}`")]
    UndefinedPrefix {
        line: usize,
        col: usize,
        prefix: String,
    },
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PrefixedName(String, String),
    BlankLabel(String),
    Literal {
        lexical: String,
        datatype: Option<Box<Tok>>,
        lang: Option<String>,
    },
    Number(String),
    A,
    PrefixDirective,
    Dot,
    Semicolon,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl Lexer {
    fn new(input: &str) -> Self {
        Lexer {
            chars: input.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn next_token(&mut self) -> Result<Spanned, TurtleError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let spanned = |tok| Spanned { tok, line, col };
        let Some(c) = self.peek() else {
            return Ok(spanned(Tok::Eof));
        };
        match c {
            '<' => {
                self.bump();
                let mut iri = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(c) if c.is_whitespace() => return Err(self.err("whitespace inside IRI")),
                        Some(c) => iri.push(c),
                        None => return Err(self.err("unterminated IRI")),
                    }
                }
                if !Term::valid_iri(&iri) {
                    return Err(self.err(format!("malformed IRI `{iri}`: missing scheme")));
                }
                Ok(spanned(Tok::Iri(iri)))
            }
            '"' => {
                self.bump();
                let mut lexical = String::new();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('n') => lexical.push('\n'),
                            Some('r') => lexical.push('\r'),
                            Some('t') => lexical.push('\t'),
                            Some('"') => lexical.push('"'),
                            Some('\\') => lexical.push('\\'),
                            Some(other) => return Err(self.err(format!("unknown escape `\\{other}`"))),
                            None => return Err(self.err("unterminated literal")),
                        },
                        Some(c) => lexical.push(c),
                        None => return Err(self.err("unterminated literal")),
                    }
                }
                if self.peek() == Some('@') {
                    self.bump();
                    let mut lang = String::new();
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                        lang.push(self.bump().unwrap());
                    }
                    if lang.is_empty() {
                        return Err(self.err("empty language tag"));
                    }
                    return Ok(spanned(Tok::Literal {
                        lexical,
                        datatype: None,
                        lang: Some(lang),
                    }));
                }
                if self.peek() == Some('^') {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(self.err("expected `^^` before datatype"));
                    }
                    let dt = self.next_token()?;
                    match dt.tok {
                        Tok::Iri(_) | Tok::PrefixedName(_, _) => {
                            return Ok(spanned(Tok::Literal {
                                lexical,
                                datatype: Some(Box::new(dt.tok)),
                                lang: None,
                            }))
                        }
                        _ => return Err(self.err("datatype must be an IRI or prefixed name")),
                    }
                }
                Ok(spanned(Tok::Literal {
                    lexical,
                    datatype: None,
                    lang: None,
                }))
            }
            '.' => {
                self.bump();
                Ok(spanned(Tok::Dot))
            }
            ';' => {
                self.bump();
                Ok(spanned(Tok::Semicolon))
            }
            ',' => {
                self.bump();
                Ok(spanned(Tok::Comma))
            }
            '@' => {
                self.bump();
                let word = self.take_word();
                if word == "prefix" {
                    Ok(spanned(Tok::PrefixDirective))
                } else {
                    Err(self.err(format!("unsupported directive `@{word}`")))
                }
            }
            '_' => {
                self.bump();
                if self.bump() != Some(':') {
                    return Err(self.err("expected `:` after `_`"));
                }
                let label = self.take_word();
                if label.is_empty() {
                    return Err(self.err("empty blank-node label"));
                }
                Ok(spanned(Tok::BlankLabel(label)))
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let mut num = String::new();
                if c == '-' || c == '+' {
                    num.push(self.bump().unwrap());
                }
                while matches!(self.peek(), Some(d) if d.is_ascii_digit() || d == '.') {
                    // A dot followed by a non-digit terminates the statement
                    // rather than extending the number (`5 .` vs `5.2`).
                    if self.peek() == Some('.')
                        && !matches!(self.chars.get(self.pos + 1), Some(d) if d.is_ascii_digit())
                    {
                        break;
                    }
                    num.push(self.bump().unwrap());
                }
                if num.is_empty() || num == "-" || num == "+" {
                    return Err(self.err("malformed numeric literal"));
                }
                Ok(spanned(Tok::Number(num)))
            }
            _ => {
                let word = self.take_word();
                if word.is_empty() {
                    let c = self.peek().unwrap();
                    return Err(self.err(format!("unexpected character `{c}`")));
                }
                if self.peek() == Some(':') {
                    self.bump();
                    let local = self.take_word();
                    return Ok(spanned(Tok::PrefixedName(word, local)));
                }
                if word == "a" {
                    return Ok(spanned(Tok::A));
                }
                Err(self.err(format!("unexpected token `{word}`")))
            }
        }
    }

    fn take_word(&mut self) -> String {
        let mut word = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            word.push(self.bump().unwrap());
        }
        word
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    prefixes: HashMap<String, String>,
    blanks: BlankScope,
    triples: Vec<Triple>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, s: &Spanned, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax {
            line: s.line,
            col: s.col,
            message: message.into(),
        }
    }

    fn expand(&self, s: &Spanned, prefix: &str, local: &str) -> Result<String, TurtleError> {
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(TurtleError::UndefinedPrefix {
                line: s.line,
                col: s.col,
                prefix: prefix.to_string(),
            }),
        }
    }

    fn term_of(&mut self, s: Spanned, as_predicate: bool) -> Result<Term, TurtleError> {
        match s.tok.clone() {
            Tok::Iri(iri) => Ok(Term::Iri(iri)),
            Tok::PrefixedName(p, l) => Ok(Term::Iri(self.expand(&s, &p, &l)?)),
            Tok::A if as_predicate => Ok(Term::iri(vocab::RDF_TYPE)),
            Tok::BlankLabel(label) if !as_predicate => Ok(Term::blank(self.blanks.resolve(&label))),
            Tok::Literal {
                lexical,
                datatype,
                lang,
            } if !as_predicate => {
                let datatype = match datatype {
                    Some(dt) => Some(match *dt {
                        Tok::Iri(iri) => iri,
                        Tok::PrefixedName(p, l) => self.expand(&s, &p, &l)?,
                        _ => unreachable!(),
                    }),
                    None => None,
                };
                Ok(Term::Literal {
                    lexical,
                    datatype,
                    lang,
                })
            }
            Tok::Number(num) if !as_predicate => {
                let dt = if num.contains('.') {
                    vocab::XSD_DECIMAL
                } else {
                    vocab::XSD_INTEGER
                };
                Ok(Term::typed_literal(num, dt))
            }
            _ => Err(self.err_at(&s, format!("unexpected token {:?}", s.tok))),
        }
    }

    fn parse_document(&mut self) -> Result<(), TurtleError> {
        loop {
            match self.peek().tok.clone() {
                Tok::Eof => return Ok(()),
                Tok::PrefixDirective => {
                    self.bump();
                    let name = self.bump();
                    let Tok::PrefixedName(prefix, local) = name.tok.clone() else {
                        return Err(self.err_at(&name, "expected `name:` after @prefix"));
                    };
                    if !local.is_empty() {
                        return Err(self.err_at(&name, "prefix declaration must end with `:`"));
                    }
                    let iri_tok = self.bump();
                    let Tok::Iri(ns) = iri_tok.tok.clone() else {
                        return Err(self.err_at(&iri_tok, "expected IRI in @prefix"));
                    };
                    let dot = self.bump();
                    if dot.tok != Tok::Dot {
                        return Err(self.err_at(&dot, "expected `.` after @prefix"));
                    }
                    self.prefixes.insert(prefix, ns);
                }
                _ => self.parse_triples()?,
            }
        }
    }

    fn parse_triples(&mut self) -> Result<(), TurtleError> {
        let subj_tok = self.bump();
        let subject = self.term_of(subj_tok.clone(), false)?;
        if subject.is_literal() {
            return Err(self.err_at(&subj_tok, "subject must not be a literal"));
        }
        loop {
            let verb_tok = self.bump();
            let predicate = self.term_of(verb_tok.clone(), true)?;
            loop {
                let obj_tok = self.bump();
                if matches!(obj_tok.tok, Tok::Eof) {
                    return Err(self.err_at(&obj_tok, "unexpected end of input in object list"));
                }
                let object = self.term_of(obj_tok.clone(), false)?;
                self.triples.push(
                    Triple::new(subject.clone(), predicate.clone(), object)
                        .map_err(|e| self.err_at(&obj_tok, e.to_string()))?,
                );
                if self.peek().tok == Tok::Comma {
                    self.bump();
                    continue;
                }
                break;
            }
            match self.peek().tok.clone() {
                Tok::Semicolon => {
                    self.bump();
                    // Turtle allows a trailing `;` before `.`
                    if self.peek().tok == Tok::Dot {
                        self.bump();
                        return Ok(());
                    }
                    continue;
                }
                Tok::Dot => {
                    self.bump();
                    return Ok(());
                }
                _ => {
                    let s = self.peek().clone();
                    return Err(self.err_at(&s, "expected `;`, `,` or `.`"));
                }
            }
        }
    }
}

pub fn parse_turtle(input: &str) -> Result<Vec<Triple>, TurtleError> {
    let mut lexer = Lexer::new(input);
    let mut tokens = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let eof = t.tok == Tok::Eof;
        tokens.push(t);
        if eof {
            break;
        }
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        prefixes: HashMap::new(),
        blanks: BlankScope::default(),
        triples: Vec::new(),
    };
    parser.parse_document()?;
    Ok(parser.triples)
}
