//! N-Triples reader and writer.
//!
//! One statement per line, `.`-terminated. Blank-node labels are renamed to
//! `_:b<n>` in first-occurrence order so that ingestion is deterministic
//! regardless of the labels a document happens to use.

use crate::model::{Term, Triple};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// Tracks the `_:label -> _:b<n>` renaming for one document.
#[derive(Default)]
pub(crate) struct BlankScope {
    map: HashMap<String, String>,
}

impl BlankScope {
    pub(crate) fn resolve(&mut self, label: &str) -> String {
        let next = format!("b{}", self.map.len());
        self.map.entry(label.to_string()).or_insert(next).clone()
    }
}

pub fn parse_ntriples(input: &str) -> Result<Vec<Triple>, ParseError> {
    let mut triples = Vec::new();
    let mut blanks = BlankScope::default();
    for (idx, raw_line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cursor = Cursor::new(line, line_no);
        let subject = cursor.parse_term(&mut blanks)?;
        if subject.is_literal() {
            return Err(ParseError::new(line_no, "subject must not be a literal"));
        }
        cursor.skip_ws();
        let predicate = cursor.parse_term(&mut blanks)?;
        if !predicate.is_iri() {
            return Err(ParseError::new(line_no, "predicate must be an IRI"));
        }
        cursor.skip_ws();
        if cursor.at_end() {
            return Err(ParseError::new(line_no, "missing object term"));
        }
        let object = cursor.parse_term(&mut blanks)?;
        cursor.skip_ws();
        if !cursor.eat('.') {
            return Err(ParseError::new(line_no, "missing `.` statement terminator"));
        }
        cursor.skip_ws();
        if !cursor.at_end() && !cursor.rest().starts_with('#') {
            return Err(ParseError::new(line_no, "trailing characters after `.`"));
        }
        triples.push(
            Triple::new(subject, predicate, object)
                .map_err(|e| ParseError::new(line_no, e.to_string()))?,
        );
    }
    Ok(triples)
}

pub fn serialize_ntriples(triples: &[Triple]) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}

pub(crate) struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str, line: usize) -> Self {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            line,
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    pub(crate) fn eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    pub(crate) fn rest(&self) -> String {
        self.chars[self.pos.min(self.chars.len())..].iter().collect()
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, message.into())
    }

    pub(crate) fn parse_term(&mut self, blanks: &mut BlankScope) -> Result<Term, ParseError> {
        match self.peek() {
            Some('<') => self.parse_iri(),
            Some('"') => self.parse_literal(),
            Some('_') => self.parse_blank(blanks),
            Some(c) => Err(self.err(format!("unexpected character `{c}`"))),
            None => Err(self.err("unexpected end of statement")),
        }
    }

    pub(crate) fn parse_iri(&mut self) -> Result<Term, ParseError> {
        debug_assert_eq!(self.peek(), Some('<'));
        self.bump();
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some(c) if c.is_whitespace() => {
                    return Err(self.err("whitespace inside IRI"));
                }
                Some(c) => iri.push(c),
                None => return Err(self.err("unterminated IRI (missing `>`)")),
            }
        }
        if !Term::valid_iri(&iri) {
            return Err(self.err(format!("malformed IRI `{iri}`: missing scheme")));
        }
        Ok(Term::Iri(iri))
    }

    pub(crate) fn parse_literal(&mut self) -> Result<Term, ParseError> {
        debug_assert_eq!(self.peek(), Some('"'));
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
                    Some(c) => return Err(self.err(format!("unknown escape `\\{c}`"))),
                    None => return Err(self.err("unterminated literal")),
                },
                Some(c) => lexical.push(c),
                None => return Err(self.err("unterminated literal")),
            }
        }
        if self.eat('@') {
            let mut lang = String::new();
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                lang.push(self.bump().unwrap());
            }
            if lang.is_empty() {
                return Err(self.err("empty language tag"));
            }
            return Ok(Term::lang_literal(lexical, lang));
        }
        if self.peek() == Some('^') {
            self.bump();
            if !self.eat('^') {
                return Err(self.err("expected `^^` before datatype IRI"));
            }
            if self.peek() != Some('<') {
                return Err(self.err("expected `<` after `^^`"));
            }
            let dt = self.parse_iri()?;
            let Term::Iri(dt) = dt else { unreachable!() };
            return Ok(Term::typed_literal(lexical, dt));
        }
        Ok(Term::literal(lexical))
    }

    fn parse_blank(&mut self, blanks: &mut BlankScope) -> Result<Term, ParseError> {
        self.bump();
        if !self.eat(':') {
            return Err(self.err("expected `:` after `_`"));
        }
        let mut label = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            label.push(self.bump().unwrap());
        }
        if label.is_empty() {
            return Err(self.err("empty blank-node label"));
        }
        Ok(Term::blank(blanks.resolve(&label)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::vocab;

    #[test]
    fn single_statement() {
        let triples = parse_ntriples("<http://ex/a> <http://ex/p> \"v\" .").unwrap();
        assert_eq!(
            triples,
            vec![Triple::new(
                Term::iri("http://ex/a"),
                Term::iri("http://ex/p"),
                Term::literal("v")
            )
            .unwrap()]
        );
    }

    #[test]
    fn empty_input_is_empty_list() {
        assert!(parse_ntriples("").unwrap().is_empty());
        assert!(parse_ntriples("\n# comment only\n").unwrap().is_empty());
    }

    #[test]
    fn missing_object_is_an_error_at_line_one() {
        let err = parse_ntriples("<http://ex/a> <http://ex/p>").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn error_line_numbers_track_the_document() {
        let doc = "<http://ex/a> <http://ex/p> \"v\" .\n<http://ex/a> <http://ex/p> \"unterminated .";
        let err = parse_ntriples(doc).unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn typed_and_tagged_literals() {
        let doc = format!(
            "<http://ex/a> <http://ex/p> \"5\"^^<{}> .\n<http://ex/a> <http://ex/q> \"hi\"@en .",
            vocab::XSD_INTEGER
        );
        let triples = parse_ntriples(&doc).unwrap();
        assert_eq!(triples[0].object, Term::typed_literal("5", vocab::XSD_INTEGER));
        assert_eq!(triples[1].object, Term::lang_literal("hi", "en"));
    }

    #[test]
    fn blank_nodes_renamed_in_first_occurrence_order() {
        let doc = "_:x <http://ex/p> _:y .\n_:y <http://ex/p> _:x .";
        let triples = parse_ntriples(doc).unwrap();
        assert_eq!(triples[0].subject, Term::blank("b0"));
        assert_eq!(triples[0].object, Term::blank("b1"));
        assert_eq!(triples[1].subject, Term::blank("b1"));
        assert_eq!(triples[1].object, Term::blank("b0"));
    }

    #[test]
    fn relative_iri_rejected() {
        let err = parse_ntriples("<no-scheme> <http://ex/p> \"v\" .").unwrap_err();
        assert!(err.message.contains("scheme"), "{}", err.message);
    }

    #[test]
    fn round_trip_preserves_triples() {
        let doc = "<http://ex/a> <http://ex/p> \"line\\nbreak\" .\n_:n1 <http://ex/p> <http://ex/a> .";
        let triples = parse_ntriples(doc).unwrap();
        let reparsed = parse_ntriples(&serialize_ntriples(&triples)).unwrap();
        assert_eq!(triples, reparsed);
    }
}
