//! Parser for the fault tree text format.
//!
//! Statements are `;`-terminated: one `toplevel <name>;` plus gate definitions
//! `<name> = and(...);`, `or(...)`, `vot(<k>; ...)`. `#` starts a comment.
//! Names referenced but never defined are basic events.

use indexmap::IndexMap;

use super::{ElementDef, FaultTree, FtError, GateType};
use crate::lex::{lex, ParseError, Tok, Token};

/// Parses and validates; rejects trees with structural violations.
pub fn parse_fault_tree(input: &str) -> Result<FaultTree, FtError> {
    let ft = parse_unvalidated(input)?;
    let report = ft.validate();
    if report.is_empty() {
        Ok(ft)
    } else {
        Err(FtError::Invalid(report))
    }
}

/// Parses without the structural checks, for use with [`FaultTree::validate`].
pub fn parse_unvalidated(input: &str) -> Result<FaultTree, ParseError> {
    let tokens = lex(input)?;
    Parser { tokens, cursor: 0 }.file()
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

    fn name(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) | Tok::Quoted(s) => Ok((s.clone(), t.clone())),
            other => Err(ParseError::at(&t, format!("expected {what}, found {other}"))),
        }
    }

    fn file(mut self) -> Result<FaultTree, ParseError> {
        let mut elements: IndexMap<String, ElementDef> = IndexMap::new();
        let mut top: Option<String> = None;

        while self.peek().tok != Tok::Eof {
            let first = self.peek().clone();
            if first.tok == Tok::Ident("toplevel".into()) {
                self.next();
                let (name, _) = self.name("the top-level element name")?;
                self.expect(Tok::Semi, "`;`")?;
                if top.is_some() {
                    return Err(ParseError::at(&first, "duplicate toplevel line"));
                }
                elements.entry(name.clone()).or_insert(ElementDef::Basic);
                top = Some(name);
            } else {
                let (name, name_tok) = self.name("an element name or `toplevel`")?;
                self.expect(Tok::Eq, "`=`")?;
                let (kw, kw_tok) = self.name("a gate type (`and`, `or`, `vot`)")?;
                self.expect(Tok::LParen, "`(`")?;
                let gate = match kw.to_ascii_lowercase().as_str() {
                    "and" => GateType::And,
                    "or" => GateType::Or,
                    "vot" => {
                        let kt = self.next();
                        let k = match &kt.tok {
                            Tok::Int(k) => *k,
                            other => {
                                return Err(ParseError::at(
                                    &kt,
                                    format!("expected the vot threshold, found {other}"),
                                ))
                            }
                        };
                        self.expect(Tok::Semi, "`;` after the vot threshold")?;
                        GateType::Vot {
                            k: u32::try_from(k).map_err(|_| {
                                ParseError::at(&kt, format!("vot threshold {k} out of range"))
                            })?,
                        }
                    }
                    other => {
                        return Err(ParseError::at(
                            &kw_tok,
                            format!("unknown gate type `{other}` (expected `and`, `or`, `vot`)"),
                        ))
                    }
                };
                let mut children = Vec::new();
                loop {
                    let (child, _) = self.name("a child element name")?;
                    children.push(child);
                    let t = self.next();
                    match &t.tok {
                        Tok::Comma => continue,
                        Tok::RParen => break,
                        other => {
                            return Err(ParseError::at(
                                &t,
                                format!("expected `,` or `)`, found {other}"),
                            ))
                        }
                    }
                }
                self.expect(Tok::Semi, "`;`")?;

                if let GateType::Vot { k } = gate {
                    let n = children.len();
                    if n < 2 || k < 1 || k as usize > n {
                        return Err(ParseError::at(
                            &kw_tok,
                            format!("vot({k}; ...) needs 1 <= k <= n and n >= 2, has n = {n}"),
                        ));
                    }
                }

                match elements.get(&name) {
                    Some(ElementDef::Gate { .. }) => {
                        return Err(ParseError::at(
                            &name_tok,
                            format!("duplicate definition of `{name}`"),
                        ))
                    }
                    Some(ElementDef::Basic) => {
                        // Seen earlier as a reference; move to its definition
                        // position so serialization round-trips.
                        elements.shift_remove(&name);
                    }
                    None => {}
                }
                elements.insert(name, ElementDef::Gate { gate, children: children.clone() });
                for c in children {
                    elements.entry(c).or_insert(ElementDef::Basic);
                }
            }
        }

        let top = match top {
            Some(t) => t,
            None => {
                let eof = self.peek().clone();
                return Err(ParseError::at(&eof, "missing toplevel line"));
            }
        };
        Ok(FaultTree::new(elements, top))
    }
}
