//! Tokenizer for ShapeScript source. `#` starts a line comment.

use super::ast::Span;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Ident(String),
    Number(f64),
    KwLet,
    KwFn,
    KwFor,
    KwIn,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semicolon,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    DotDot,
}

impl Token {
    pub fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Number(n) => format!("number `{n}`"),
            Token::KwLet => "`let`".into(),
            Token::KwFn => "`fn`".into(),
            Token::KwFor => "`for`".into(),
            Token::KwIn => "`in`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::LBrace => "`{`".into(),
            Token::RBrace => "`}`".into(),
            Token::Comma => "`,`".into(),
            Token::Semicolon => "`;`".into(),
            Token::Assign => "`=`".into(),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::DotDot => "`..`".into(),
        }
    }
}

pub type SpannedToken = (Token, Span);

pub fn lex(source: &str) -> Result<Vec<SpannedToken>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        match c {
            ' ' | '\t' | '\r' | '\n' => bump!(),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
            }
            '(' => {
                tokens.push((Token::LParen, span));
                bump!();
            }
            ')' => {
                tokens.push((Token::RParen, span));
                bump!();
            }
            '{' => {
                tokens.push((Token::LBrace, span));
                bump!();
            }
            '}' => {
                tokens.push((Token::RBrace, span));
                bump!();
            }
            ',' => {
                tokens.push((Token::Comma, span));
                bump!();
            }
            ';' => {
                tokens.push((Token::Semicolon, span));
                bump!();
            }
            '=' => {
                tokens.push((Token::Assign, span));
                bump!();
            }
            '+' => {
                tokens.push((Token::Plus, span));
                bump!();
            }
            '-' => {
                tokens.push((Token::Minus, span));
                bump!();
            }
            '*' => {
                tokens.push((Token::Star, span));
                bump!();
            }
            '/' => {
                tokens.push((Token::Slash, span));
                bump!();
            }
            '.' => {
                if i + 1 < chars.len() && chars[i + 1] == '.' {
                    tokens.push((Token::DotDot, span));
                    bump!();
                    bump!();
                } else {
                    return Err(ParseError::syntax(
                        span,
                        "unexpected `.` (did you mean `..`?)",
                    ));
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
                // A `.` is part of the number only when not the `..` range
                // operator and followed by a digit.
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    bump!();
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while i < j {
                            bump!();
                        }
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            bump!();
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text.parse().map_err(|_| {
                    ParseError::syntax(span, format!("invalid number literal `{text}`"))
                })?;
                tokens.push((Token::Number(value), span));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    bump!();
                }
                let text: String = chars[start..i].iter().collect();
                let tok = match text.as_str() {
                    "let" => Token::KwLet,
                    "fn" => Token::KwFn,
                    "for" => Token::KwFor,
                    "in" => Token::KwIn,
                    _ => Token::Ident(text),
                };
                tokens.push((tok, span));
            }
            other => {
                return Err(ParseError::syntax(
                    span,
                    format!("unexpected character `{other}`"),
                ));
            }
        }
    }
    Ok(tokens)
}
