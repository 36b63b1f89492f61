//! Shared token stream for the fault tree format and the formula grammar.
//!
//! The lexer is keyword-agnostic: words come out as `Ident` and each parser
//! decides contextually which identifiers act as keywords.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Double-quoted name, unescaped.
    Quoted(String),
    Int(u64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    /// `=`
    Eq,
    /// `:=`
    Assign,
    /// `!`
    Bang,
    /// `&`
    Amp,
    /// `|`
    Pipe,
    /// `=>`
    Implies,
    /// `<=>`
    Iff,
    /// `!=`
    Neq,
    Lt,
    Le,
    Ge,
    Gt,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Quoted(s) => write!(f, "`\"{s}\"`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Assign => write!(f, "`:=`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Implies => write!(f, "`=>`"),
            Tok::Iff => write!(f, "`<=>`"),
            Tok::Neq => write!(f, "`!=`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A syntax error, from either text format, with its source position.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(t: &Token, message: impl Into<String>) -> ParseError {
        ParseError { line: t.line, col: t.col, message: message.into() }
    }
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> ParseError {
        ParseError { line: e.line, col: e.col, message: e.message }
    }
}

pub fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn lex(input: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut it = input.chars().peekable();

    macro_rules! push {
        ($tok:expr, $line:expr, $col:expr) => {
            out.push(Token { tok: $tok, line: $line, col: $col })
        };
    }

    while let Some(&c) = it.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |it: &mut std::iter::Peekable<std::str::Chars>| {
            let c = it.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut it);
            }
            '#' => {
                while let Some(&c) = it.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut it);
                }
            }
            '"' => {
                bump(&mut it);
                let mut s = String::new();
                loop {
                    match it.peek() {
                        None | Some('\n') => {
                            return Err(LexError {
                                line: tl,
                                col: tc,
                                message: "unterminated quoted name".into(),
                            })
                        }
                        Some('"') => {
                            bump(&mut it);
                            break;
                        }
                        Some('\\') => {
                            bump(&mut it);
                            match it.peek() {
                                Some('"') | Some('\\') => s.push(bump(&mut it)),
                                _ => {
                                    return Err(LexError {
                                        line: tl,
                                        col: tc,
                                        message: "invalid escape in quoted name (only \\\" and \\\\)"
                                            .into(),
                                    })
                                }
                            }
                        }
                        Some(_) => s.push(bump(&mut it)),
                    }
                }
                if s.is_empty() {
                    return Err(LexError {
                        line: tl,
                        col: tc,
                        message: "empty quoted name".into(),
                    });
                }
                push!(Tok::Quoted(s), tl, tc);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = it.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(bump(&mut it));
                    } else {
                        break;
                    }
                }
                push!(Tok::Ident(s), tl, tc);
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = it.peek() {
                    if c.is_ascii_digit() {
                        s.push(bump(&mut it));
                    } else {
                        break;
                    }
                }
                let n: u64 = s.parse().map_err(|_| LexError {
                    line: tl,
                    col: tc,
                    message: format!("integer literal `{s}` out of range"),
                })?;
                push!(Tok::Int(n), tl, tc);
            }
            '(' => {
                bump(&mut it);
                push!(Tok::LParen, tl, tc);
            }
            ')' => {
                bump(&mut it);
                push!(Tok::RParen, tl, tc);
            }
            '[' => {
                bump(&mut it);
                push!(Tok::LBracket, tl, tc);
            }
            ']' => {
                bump(&mut it);
                push!(Tok::RBracket, tl, tc);
            }
            ',' => {
                bump(&mut it);
                push!(Tok::Comma, tl, tc);
            }
            ';' => {
                bump(&mut it);
                push!(Tok::Semi, tl, tc);
            }
            '&' => {
                bump(&mut it);
                push!(Tok::Amp, tl, tc);
            }
            '|' => {
                bump(&mut it);
                push!(Tok::Pipe, tl, tc);
            }
            '!' => {
                bump(&mut it);
                if it.peek() == Some(&'=') {
                    bump(&mut it);
                    push!(Tok::Neq, tl, tc);
                } else {
                    push!(Tok::Bang, tl, tc);
                }
            }
            '=' => {
                bump(&mut it);
                if it.peek() == Some(&'>') {
                    bump(&mut it);
                    push!(Tok::Implies, tl, tc);
                } else {
                    push!(Tok::Eq, tl, tc);
                }
            }
            ':' => {
                bump(&mut it);
                if it.peek() == Some(&'=') {
                    bump(&mut it);
                    push!(Tok::Assign, tl, tc);
                } else {
                    return Err(LexError {
                        line: tl,
                        col: tc,
                        message: "expected `:=`".into(),
                    });
                }
            }
            '<' => {
                bump(&mut it);
                if it.peek() == Some(&'=') {
                    bump(&mut it);
                    if it.peek() == Some(&'>') {
                        bump(&mut it);
                        push!(Tok::Iff, tl, tc);
                    } else {
                        push!(Tok::Le, tl, tc);
                    }
                } else {
                    push!(Tok::Lt, tl, tc);
                }
            }
            '>' => {
                bump(&mut it);
                if it.peek() == Some(&'=') {
                    bump(&mut it);
                    push!(Tok::Ge, tl, tc);
                } else {
                    push!(Tok::Gt, tl, tc);
                }
            }
            other => {
                return Err(LexError {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn idents_and_punct() {
        assert_eq!(
            toks("A = or(x, y);"),
            vec![
                Tok::Ident("A".into()),
                Tok::Eq,
                Tok::Ident("or".into()),
                Tok::LParen,
                Tok::Ident("x".into()),
                Tok::Comma,
                Tok::Ident("y".into()),
                Tok::RParen,
                Tok::Semi,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn multi_char_operators() {
        assert_eq!(
            toks("a => b <=> c != !d <= 2 >= 1 < >"),
            vec![
                Tok::Ident("a".into()),
                Tok::Implies,
                Tok::Ident("b".into()),
                Tok::Iff,
                Tok::Ident("c".into()),
                Tok::Neq,
                Tok::Bang,
                Tok::Ident("d".into()),
                Tok::Le,
                Tok::Int(2),
                Tok::Ge,
                Tok::Int(1),
                Tok::Lt,
                Tok::Gt,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn quoted_names_and_escapes() {
        assert_eq!(toks(r#""CP/R""#), vec![Tok::Quoted("CP/R".into()), Tok::Eof]);
        assert_eq!(
            toks(r#""a\"b\\c""#),
            vec![Tok::Quoted(r#"a"b\c"#.into()), Tok::Eof]
        );
        assert!(lex("\"unterminated").is_err());
        assert!(lex("\"\"").is_err());
    }

    #[test]
    fn comments_and_positions() {
        let ts = lex("x # rest ignored\n  y").unwrap();
        assert_eq!(ts[0].tok, Tok::Ident("x".into()));
        assert_eq!((ts[1].line, ts[1].col), (2, 3));
        assert_eq!(ts[1].tok, Tok::Ident("y".into()));
    }

    #[test]
    fn evidence_assign() {
        assert_eq!(
            toks("[H1:=0]"),
            vec![
                Tok::LBracket,
                Tok::Ident("H1".into()),
                Tok::Assign,
                Tok::Int(0),
                Tok::RBracket,
                Tok::Eof,
            ]
        );
        let err = lex("a : b").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }

    #[test]
    fn bad_character_position() {
        let err = lex("ok\n  ^").unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
    }
}
