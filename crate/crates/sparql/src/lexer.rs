//! Token stream for the SPARQL subset grammar.

use crate::error::SparqlError;
use kgqa_rdf::Term;

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Keyword(String),
    Iri(String),
    PrefixedName(String, String),
    Var(String),
    Literal(Term),
    Integer(u64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Semicolon,
    Comma,
    Star,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    A,
    Eof,
}

impl Token {
    pub fn describe(&self) -> String {
        match self {
            Token::Keyword(k) => k.clone(),
            Token::Iri(i) => format!("<{i}>"),
            Token::PrefixedName(p, l) => format!("{p}:{l}"),
            Token::Var(v) => format!("?{v}"),
            Token::Literal(t) => t.to_string(),
            Token::Integer(n) => n.to_string(),
            Token::LBrace => "{".into(),
            Token::RBrace => "}".into(),
            Token::LParen => "(".into(),
            Token::RParen => ")".into(),
            Token::Dot => ".".into(),
            Token::Semicolon => ";".into(),
            Token::Comma => ",".into(),
            Token::Star => "*".into(),
            Token::Eq => "=".into(),
            Token::Ne => "!=".into(),
            Token::Lt => "<".into(),
            Token::Le => "<=".into(),
            Token::Gt => ">".into(),
            Token::Ge => ">=".into(),
            Token::A => "a".into(),
            Token::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpannedToken {
    pub token: Token,
    pub line: usize,
    pub col: usize,
}

const KEYWORDS: &[&str] = &[
    "SELECT", "ASK", "WHERE", "PREFIX", "DISTINCT", "OPTIONAL", "FILTER", "ORDER", "BY", "ASC",
    "DESC", "LIMIT", "GROUP", "COUNT", "AS", "REGEX", "LANG",
];

pub fn tokenize(input: &str) -> Result<Vec<SpannedToken>, SparqlError> {
    let chars: Vec<char> = input.chars().collect();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            let c = chars[pos];
            pos += 1;
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        }};
    }

    while pos < chars.len() {
        let c = chars[pos];
        let (tok_line, tok_col) = (line, col);
        let mut push = |token| {
            tokens.push(SpannedToken {
                token,
                line: tok_line,
                col: tok_col,
            })
        };
        match c {
            c if c.is_whitespace() => {
                bump!();
            }
            '#' => {
                while pos < chars.len() && chars[pos] != '\n' {
                    bump!();
                }
            }
            '{' => {
                bump!();
                push(Token::LBrace);
            }
            '}' => {
                bump!();
                push(Token::RBrace);
            }
            '(' => {
                bump!();
                push(Token::LParen);
            }
            ')' => {
                bump!();
                push(Token::RParen);
            }
            '.' => {
                bump!();
                push(Token::Dot);
            }
            ';' => {
                bump!();
                push(Token::Semicolon);
            }
            ',' => {
                bump!();
                push(Token::Comma);
            }
            '*' => {
                bump!();
                push(Token::Star);
            }
            '=' => {
                bump!();
                push(Token::Eq);
            }
            '!' => {
                bump!();
                if pos < chars.len() && chars[pos] == '=' {
                    bump!();
                    push(Token::Ne);
                } else {
                    return Err(SparqlError::syntax(line, col, "a comparison operator", "!"));
                }
            }
            '>' => {
                bump!();
                if pos < chars.len() && chars[pos] == '=' {
                    bump!();
                    push(Token::Ge);
                } else {
                    push(Token::Gt);
                }
            }
            '<' => {
                // Either an IRI reference or a less-than operator: an IRI has
                // a closing `>` before any whitespace.
                let mut probe = pos + 1;
                let mut is_iri = false;
                while probe < chars.len() {
                    let pc = chars[probe];
                    if pc == '>' {
                        is_iri = true;
                        break;
                    }
                    if pc.is_whitespace() {
                        break;
                    }
                    probe += 1;
                }
                if is_iri {
                    bump!();
                    let mut iri = String::new();
                    while pos < chars.len() && chars[pos] != '>' {
                        iri.push(bump!());
                    }
                    bump!(); // consume `>`
                    if !Term::valid_iri(&iri) {
                        return Err(SparqlError::syntax(
                            tok_line,
                            tok_col,
                            "an absolute IRI",
                            format!("<{iri}>"),
                        ));
                    }
                    push(Token::Iri(iri));
                } else {
                    bump!();
                    if pos < chars.len() && chars[pos] == '=' {
                        bump!();
                        push(Token::Le);
                    } else {
                        push(Token::Lt);
                    }
                }
            }
            '?' | '$' => {
                bump!();
                let mut name = String::new();
                while pos < chars.len()
                    && (chars[pos].is_alphanumeric() || chars[pos] == '_')
                {
                    name.push(bump!());
                }
                if name.is_empty() {
                    return Err(SparqlError::syntax(tok_line, tok_col, "a variable name", "?"));
                }
                push(Token::Var(name));
            }
            '"' => {
                bump!();
                let mut lexical = String::new();
                let mut closed = false;
                while pos < chars.len() {
                    match bump!() {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => {
                            if pos >= chars.len() {
                                break;
                            }
                            match bump!() {
                                'n' => lexical.push('\n'),
                                'r' => lexical.push('\r'),
                                't' => lexical.push('\t'),
                                '"' => lexical.push('"'),
                                '\\' => lexical.push('\\'),
                                other => {
                                    return Err(SparqlError::syntax(
                                        line,
                                        col,
                                        "a valid escape",
                                        format!("\\{other}"),
                                    ))
                                }
                            }
                        }
                        other => lexical.push(other),
                    }
                }
                if !closed {
                    return Err(SparqlError::syntax(
                        tok_line,
                        tok_col,
                        "a closing `\"`",
                        "end of input",
                    ));
                }
                // Optional @lang or ^^<dt>
                if pos < chars.len() && chars[pos] == '@' {
                    bump!();
                    let mut lang = String::new();
                    while pos < chars.len()
                        && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '-')
                    {
                        lang.push(bump!());
                    }
                    if lang.is_empty() {
                        return Err(SparqlError::syntax(line, col, "a language tag", "@"));
                    }
                    push(Token::Literal(Term::lang_literal(lexical, lang)));
                } else if pos + 1 < chars.len() && chars[pos] == '^' && chars[pos + 1] == '^' {
                    bump!();
                    bump!();
                    if pos >= chars.len() || chars[pos] != '<' {
                        return Err(SparqlError::syntax(line, col, "`<` after `^^`", "other"));
                    }
                    bump!();
                    let mut dt = String::new();
                    while pos < chars.len() && chars[pos] != '>' {
                        dt.push(bump!());
                    }
                    if pos >= chars.len() {
                        return Err(SparqlError::syntax(line, col, "`>`", "end of input"));
                    }
                    bump!();
                    push(Token::Literal(Term::typed_literal(lexical, dt)));
                } else {
                    push(Token::Literal(Term::literal(lexical)));
                }
            }
            c if c.is_ascii_digit() => {
                let mut num = String::new();
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    num.push(bump!());
                }
                let value = num.parse::<u64>().map_err(|_| {
                    SparqlError::syntax(tok_line, tok_col, "an integer", &num)
                })?;
                push(Token::Integer(value));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut word = String::new();
                while pos < chars.len()
                    && (chars[pos].is_alphanumeric() || chars[pos] == '_' || chars[pos] == '-')
                {
                    word.push(bump!());
                }
                if pos < chars.len() && chars[pos] == ':' {
                    bump!();
                    let mut local = String::new();
                    while pos < chars.len()
                        && (chars[pos].is_alphanumeric()
                            || chars[pos] == '_'
                            || chars[pos] == '-'
                            || chars[pos] == '.')
                    {
                        local.push(bump!());
                    }
                    push(Token::PrefixedName(word, local));
                } else if word == "a" {
                    push(Token::A);
                } else {
                    let upper = word.to_ascii_uppercase();
                    if KEYWORDS.contains(&upper.as_str()) {
                        push(Token::Keyword(upper));
                    } else {
                        return Err(SparqlError::syntax(
                            tok_line,
                            tok_col,
                            "a keyword, variable, IRI or literal",
                            &word,
                        ));
                    }
                }
            }
            other => {
                return Err(SparqlError::syntax(
                    tok_line,
                    tok_col,
                    "a token",
                    other.to_string(),
                ));
            }
        }
    }
    tokens.push(SpannedToken {
        token: Token::Eof,
        line,
        col,
    });
    Ok(tokens)
}
