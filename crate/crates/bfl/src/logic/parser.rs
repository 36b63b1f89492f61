//! Recursive-descent parser for the formula grammar.
//!
//! Binding strength, loosest to tightest: `exists`/`forall` (scope over
//! everything to their right), `<=>`/`!=` (left-associative), `=>`
//! (right-associative), `|`, `&`, `!`, then postfix evidence brackets.
//! Word operators are recognized case-insensitively; a quoted `"name"`
//! always refers to an element, never to an operator.

use crate::ft::FaultTree;
use crate::lex::{lex, ParseError, Tok, Token};

use super::{resolve, CmpOp, Formula, FormulaError};

const RESERVED: [&str; 8] = ["exists", "forall", "mcs", "mps", "idp", "sup", "vot", "others"];

pub(crate) fn is_reserved_word(s: &str) -> bool {
    RESERVED.iter().any(|w| s.eq_ignore_ascii_case(w))
}

/// Parses a formula and checks it against the tree (element names, evidence
/// targets, counting thresholds, verdict operators outermost).
pub fn parse_formula(input: &str, ft: &FaultTree) -> Result<Formula, FormulaError> {
    let tokens = lex(input).map_err(ParseError::from)?;
    let mut parser = Parser { tokens, cursor: 0 };
    let f = parser.formula()?;
    let t = parser.next();
    if t.tok != Tok::Eof {
        return Err(ParseError::at(&t, format!("expected end of input, found {}", t.tok)).into());
    }
    resolve(&f, ft)?;
    Ok(f)
}

struct Parser {
    tokens: Vec<Token>,
    cursor: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.cursor]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.cursor].clone();
        if self.cursor + 1 < self.tokens.len() {
            self.cursor += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == tok {
            Ok(t)
        } else {
            Err(ParseError::at(&t, format!("expected {what}, found {}", t.tok)))
        }
    }

    fn peek_word(&self) -> Option<String> {
        match &self.peek().tok {
            Tok::Ident(s) => Some(s.to_ascii_lowercase()),
            _ => None,
        }
    }

    /// An element name: a plain identifier (reserved words excluded) or a
    /// quoted name.
    fn element_name(&mut self, what: &str) -> Result<String, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => {
                if is_reserved_word(s) {
                    Err(ParseError::at(
                        &t,
                        format!("`{s}` is a reserved word; write \"{s}\" to name an element"),
                    ))
                } else {
                    Ok(s.clone())
                }
            }
            Tok::Quoted(s) => Ok(s.clone()),
            other => Err(ParseError::at(&t, format!("expected {what}, found {other}"))),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek_word().as_deref() {
            Some("exists") => {
                self.next();
                Ok(Formula::Exists(Box::new(self.formula()?)))
            }
            Some("forall") => {
                self.next();
                Ok(Formula::Forall(Box::new(self.formula()?)))
            }
            _ => self.iff_level(),
        }
    }

    fn iff_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implies_level()?;
        loop {
            match self.peek().tok {
                Tok::Iff => {
                    self.next();
                    let rhs = self.implies_level()?;
                    lhs = Formula::Iff(Box::new(lhs), Box::new(rhs));
                }
                Tok::Neq => {
                    self.next();
                    let rhs = self.implies_level()?;
                    lhs = Formula::Neq(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn implies_level(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_level()?;
        if self.peek().tok == Tok::Implies {
            self.next();
            let rhs = self.implies_level()?;
            Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and_level()?;
        while self.peek().tok == Tok::Pipe {
            self.next();
            let rhs = self.and_level()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek().tok == Tok::Amp {
            self.next();
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.peek().tok == Tok::Bang {
            self.next();
            Ok(Formula::Not(Box::new(self.unary()?)))
        } else {
            self.postfix()
        }
    }

    fn postfix(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.primary()?;
        while self.peek().tok == Tok::LBracket {
            f = self.evidence_bracket(f)?;
        }
        Ok(f)
    }

    fn evidence_bracket(&mut self, base: Formula) -> Result<Formula, ParseError> {
        self.next(); // the `[`
        let mut subs = Vec::new();
        let mut others = None;
        loop {
            let is_others = matches!(
                &self.peek().tok, Tok::Ident(s) if s.eq_ignore_ascii_case("others")
            );
            if is_others {
                let t = self.next();
                if others.is_some() {
                    return Err(ParseError::at(&t, "duplicate `others` entry in evidence"));
                }
                self.expect(Tok::Assign, "`:=`")?;
                others = Some(self.status_bit()?);
            } else {
                let name = self.element_name("a basic event name or `others`")?;
                self.expect(Tok::Assign, "`:=`")?;
                subs.push((name, self.status_bit()?));
            }
            let t = self.next();
            match &t.tok {
                Tok::Comma => continue,
                Tok::RBracket => break,
                other => {
                    return Err(ParseError::at(&t, format!("expected `,` or `]`, found {other}")))
                }
            }
        }
        Ok(Formula::Evidence { base: Box::new(base), subs, others })
    }

    fn status_bit(&mut self) -> Result<bool, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Int(0) => Ok(false),
            Tok::Int(1) => Ok(true),
            ref other => Err(ParseError::at(&t, format!("expected 0 or 1, found {other}"))),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Quoted(s) => Ok(Formula::Atom(s.clone())),
            Tok::Ident(s) => match s.to_ascii_lowercase().as_str() {
                "mcs" | "mps" => {
                    self.expect(Tok::LParen, format!("`(` after `{s}`").as_str())?;
                    let f = self.formula()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(if s.eq_ignore_ascii_case("mcs") {
                        Formula::Mcs(Box::new(f))
                    } else {
                        Formula::Mps(Box::new(f))
                    })
                }
                "idp" => {
                    self.expect(Tok::LParen, "`(` after `IDP`")?;
                    let a = self.formula()?;
                    self.expect(Tok::Comma, "`,` between the two IDP operands")?;
                    let b = self.formula()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Formula::Idp(Box::new(a), Box::new(b)))
                }
                "sup" => {
                    self.expect(Tok::LParen, "`(` after `SUP`")?;
                    let name = self.element_name("a basic event name")?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Formula::Sup(name))
                }
                "vot" => self.vot(),
                "exists" | "forall" => Err(ParseError::at(
                    &t,
                    format!("`{s}` can only appear at the start of a formula"),
                )),
                "others" => Err(ParseError::at(
                    &t,
                    "`others` is only meaningful inside an evidence bracket",
                )),
                _ => Ok(Formula::Atom(s.clone())),
            },
            other => Err(ParseError::at(&t, format!("expected a formula, found {other}"))),
        }
    }

    fn vot(&mut self) -> Result<Formula, ParseError> {
        self.expect(Tok::LParen, "`(` after `VOT`")?;
        let explicit = match self.peek().tok {
            Tok::Lt => Some(CmpOp::Lt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Eq => Some(CmpOp::Eq),
            Tok::Ge => Some(CmpOp::Ge),
            Tok::Gt => Some(CmpOp::Gt),
            _ => None,
        };
        let cmp = explicit.unwrap_or(CmpOp::Ge);
        if explicit.is_some() {
            self.next();
        }
        let kt = self.next();
        let k = match &kt.tok {
            Tok::Int(k) => *k,
            other => {
                return Err(ParseError::at(&kt, format!("expected the threshold, found {other}")))
            }
        };
        self.expect(Tok::Semi, "`;` after the threshold")?;
        let mut operands = Vec::new();
        loop {
            operands.push(self.formula()?);
            let t = self.next();
            match &t.tok {
                Tok::Comma => continue,
                Tok::RParen => break,
                other => {
                    return Err(ParseError::at(&t, format!("expected `,` or `)`, found {other}")))
                }
            }
        }
        Ok(Formula::VotCmp { cmp, k, operands })
    }
}
