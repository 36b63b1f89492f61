//! The formula language over a fault tree.
//!
//! Formulas come in two layers. Vector-layer formulas denote sets of status
//! vectors: element references, boolean connectives, evidence brackets that
//! pin basic events, counting comparisons, and the `MCS`/`MPS` minimization
//! operators. Verdict-layer formulas — `exists`, `forall`, `IDP`, `SUP` —
//! wrap vector-layer operands and denote a single true/false judgment about
//! the tree, so they may only appear outermost.
//!
//! [`parse_formula`] produces the surface syntax tree ([`Formula`]);
//! [`desugar`] lowers it to the small core ([`CoreFormula`]) that the
//! compiler consumes: atoms, negation, conjunction, single-event evidence,
//! minimization markers, quantifiers, and independence.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::ft::FaultTree;
use crate::lex::{is_plain_ident, ParseError};

mod parser;

pub use parser::parse_formula;

/// Comparison operator in a counting formula `VOT(<cmp> k; ...)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        })
    }
}

/// Surface syntax, as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    /// Reference to a tree element (basic event or gate) by name.
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Neq(Box<Formula>, Box<Formula>),
    /// One evidence bracket `base[e1 := v1, ..., others := c]`.
    Evidence {
        base: Box<Formula>,
        subs: Vec<(String, bool)>,
        others: Option<bool>,
    },
    /// `VOT(<cmp> k; f1, ..., fn)`: compares how many operands hold against `k`.
    VotCmp {
        cmp: CmpOp,
        k: u64,
        operands: Vec<Formula>,
    },
    Mcs(Box<Formula>),
    Mps(Box<Formula>),
    Exists(Box<Formula>),
    Forall(Box<Formula>),
    Idp(Box<Formula>, Box<Formula>),
    /// `SUP(e)`: the basic event never matters on its own — shorthand for
    /// independence between `e` and the top element.
    Sup(String),
}

/// Which kind of answer a formula denotes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    /// A set of status vectors.
    Vector,
    /// A single true/false verdict about the tree.
    Verdict,
}

pub fn layer_of(f: &Formula) -> Layer {
    match f {
        Formula::Exists(_) | Formula::Forall(_) | Formula::Idp(_, _) | Formula::Sup(_) => {
            Layer::Verdict
        }
        _ => Layer::Vector,
    }
}

/// The desugared core the compiler works on. Value equality is structural,
/// so the compiler can cache by formula value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CoreFormula {
    Atom(String),
    Not(Box<CoreFormula>),
    And(Box<CoreFormula>, Box<CoreFormula>),
    /// `base` with the single basic event `target` pinned to `value`.
    Evidence {
        base: Box<CoreFormula>,
        target: String,
        value: bool,
    },
    Mcs(Box<CoreFormula>),
    Mps(Box<CoreFormula>),
    Exists(Box<CoreFormula>),
    Forall(Box<CoreFormula>),
    Idp(Box<CoreFormula>, Box<CoreFormula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown element `{name}`")]
    UnknownElement { name: String },
    #[error("evidence can only fix basic events, and `{name}` is a gate")]
    EvidenceOnGate { name: String },
    #[error("basic event `{name}` is assigned twice in one evidence bracket")]
    DuplicateEvidenceTarget { name: String },
    #[error("threshold {k} exceeds the {n} operand(s) of the counting formula")]
    ThresholdTooLarge { k: u64, n: usize },
    #[error("`{construct}` yields a tree-level verdict and can only appear outermost")]
    NestedVerdict { construct: &'static str },
    #[error("SUP takes a basic event, and `{name}` is a gate")]
    SupOnGate { name: String },
}

/// Checks a formula against a tree: every referenced element must exist,
/// evidence may pin only basic events (each at most once per bracket),
/// counting thresholds must not exceed the operand count, and verdict-layer
/// operators must be outermost.
pub fn resolve(f: &Formula, ft: &FaultTree) -> Result<(), FormulaError> {
    check(f, ft, true)
}

fn check(f: &Formula, ft: &FaultTree, outermost: bool) -> Result<(), FormulaError> {
    let known = |name: &str| -> Result<(), FormulaError> {
        if ft.def(name).is_some() {
            Ok(())
        } else {
            Err(FormulaError::UnknownElement { name: name.into() })
        }
    };
    match f {
        Formula::Atom(name) => known(name),
        Formula::Not(a) | Formula::Mcs(a) | Formula::Mps(a) => check(a, ft, false),
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::Iff(a, b)
        | Formula::Neq(a, b) => {
            check(a, ft, false)?;
            check(b, ft, false)
        }
        Formula::Evidence { base, subs, .. } => {
            check(base, ft, false)?;
            let mut seen = HashSet::new();
            for (name, _) in subs {
                known(name)?;
                if !ft.is_basic_event(name) {
                    return Err(FormulaError::EvidenceOnGate { name: name.clone() });
                }
                if !seen.insert(name.as_str()) {
                    return Err(FormulaError::DuplicateEvidenceTarget { name: name.clone() });
                }
            }
            Ok(())
        }
        Formula::VotCmp { k, operands, .. } => {
            if *k as usize > operands.len() {
                return Err(FormulaError::ThresholdTooLarge {
                    k: *k,
                    n: operands.len(),
                });
            }
            operands.iter().try_for_each(|op| check(op, ft, false))
        }
        Formula::Exists(a) | Formula::Forall(a) => {
            if !outermost {
                let construct = if matches!(f, Formula::Exists(_)) {
                    "exists"
                } else {
                    "forall"
                };
                return Err(FormulaError::NestedVerdict { construct });
            }
            check(a, ft, false)
        }
        Formula::Idp(a, b) => {
            if !outermost {
                return Err(FormulaError::NestedVerdict { construct: "IDP" });
            }
            check(a, ft, false)?;
            check(b, ft, false)
        }
        Formula::Sup(name) => {
            if !outermost {
                return Err(FormulaError::NestedVerdict { construct: "SUP" });
            }
            known(name)?;
            if !ft.is_basic_event(name) {
                return Err(FormulaError::SupOnGate { name: name.clone() });
            }
            Ok(())
        }
    }
}

fn core_not(a: CoreFormula) -> CoreFormula {
    CoreFormula::Not(Box::new(a))
}

fn core_and(a: CoreFormula, b: CoreFormula) -> CoreFormula {
    CoreFormula::And(Box::new(a), Box::new(b))
}

fn core_or(a: CoreFormula, b: CoreFormula) -> CoreFormula {
    core_not(core_and(core_not(a), core_not(b)))
}

fn core_implies(a: CoreFormula, b: CoreFormula) -> CoreFormula {
    core_not(core_and(a, core_not(b)))
}

/// The core has no constants; a contradiction over any operand stands in for
/// "false", its negation for "true".
fn core_false(seed: &CoreFormula) -> CoreFormula {
    core_and(seed.clone(), core_not(seed.clone()))
}

fn core_true(seed: &CoreFormula) -> CoreFormula {
    core_not(core_false(seed))
}

/// Lowers surface syntax to the core. The tree supplies the basic-event
/// order for `others` expansion and the top element for `SUP`.
pub fn desugar(f: &Formula, ft: &FaultTree) -> CoreFormula {
    match f {
        Formula::Atom(name) => CoreFormula::Atom(name.clone()),
        Formula::Not(a) => core_not(desugar(a, ft)),
        Formula::And(a, b) => core_and(desugar(a, ft), desugar(b, ft)),
        Formula::Or(a, b) => core_or(desugar(a, ft), desugar(b, ft)),
        Formula::Implies(a, b) => core_implies(desugar(a, ft), desugar(b, ft)),
        Formula::Iff(a, b) => {
            let (a, b) = (desugar(a, ft), desugar(b, ft));
            core_and(
                core_implies(a.clone(), b.clone()),
                core_implies(b, a),
            )
        }
        Formula::Neq(a, b) => core_not(desugar(&Formula::Iff(a.clone(), b.clone()), ft)),
        Formula::Evidence { base, subs, others } => {
            let mut core = desugar(base, ft);
            let pin = |core, target: &str, value| CoreFormula::Evidence {
                base: Box::new(core),
                target: target.to_string(),
                value,
            };
            for (name, value) in subs {
                core = pin(core, name, *value);
            }
            if let Some(value) = others {
                let listed: HashSet<&str> = subs.iter().map(|(n, _)| n.as_str()).collect();
                for name in ft.basic_event_order() {
                    if !listed.contains(name.as_str()) {
                        core = pin(core, name, *value);
                    }
                }
            }
            core
        }
        Formula::VotCmp { cmp, k, operands } => desugar_counting(*cmp, *k, operands, ft),
        Formula::Mcs(a) => CoreFormula::Mcs(Box::new(desugar(a, ft))),
        Formula::Mps(a) => CoreFormula::Mps(Box::new(desugar(a, ft))),
        Formula::Exists(a) => CoreFormula::Exists(Box::new(desugar(a, ft))),
        Formula::Forall(a) => CoreFormula::Forall(Box::new(desugar(a, ft))),
        Formula::Idp(a, b) => {
            CoreFormula::Idp(Box::new(desugar(a, ft)), Box::new(desugar(b, ft)))
        }
        Formula::Sup(name) => CoreFormula::Idp(
            Box::new(CoreFormula::Atom(name.clone())),
            Box::new(CoreFormula::Atom(ft.top().to_string())),
        ),
    }
}

/// Rewrites every comparison to "at least k of the operands hold" and
/// expands that by splitting on the first operand:
/// `at_least(k; f, rest) = f ∧ at_least(k-1; rest)  ∨  ¬f ∧ at_least(k; rest)`.
/// Identical subproblems are memoized, so shared subtrees come out as equal
/// values and the compiler's by-value cache visits each only once.
fn desugar_counting(cmp: CmpOp, k: u64, operands: &[Formula], ft: &FaultTree) -> CoreFormula {
    let cores: Vec<CoreFormula> = operands.iter().map(|op| desugar(op, ft)).collect();
    let k = k as usize;
    let mut memo = std::collections::HashMap::new();
    let mut at_least = |need: usize| threshold(&cores, 0, need, &mut memo);
    match cmp {
        CmpOp::Ge => at_least(k),
        CmpOp::Gt => at_least(k + 1),
        CmpOp::Lt => core_not(at_least(k)),
        CmpOp::Le => core_not(at_least(k + 1)),
        CmpOp::Eq => {
            let lower = at_least(k);
            let upper = at_least(k + 1);
            core_and(lower, core_not(upper))
        }
    }
}

fn threshold(
    cores: &[CoreFormula],
    from: usize,
    need: usize,
    memo: &mut std::collections::HashMap<(usize, usize), CoreFormula>,
) -> CoreFormula {
    if need == 0 {
        return core_true(&cores[0]);
    }
    if need > cores.len() - from {
        return core_false(&cores[0]);
    }
    if let Some(hit) = memo.get(&(from, need)) {
        return hit.clone();
    }
    let first = cores[from].clone();
    let with_first = threshold(cores, from + 1, need - 1, memo);
    let without_first = threshold(cores, from + 1, need, memo);
    let result = core_or(
        core_and(first.clone(), with_first),
        core_and(core_not(first), without_first),
    );
    memo.insert((from, need), result.clone());
    result
}

// Binding strength, loosest to tightest; used to decide where Display needs
// parentheses.
const PREC_QUANT: u8 = 0;
const PREC_IFF: u8 = 1;
const PREC_IMPLIES: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_NOT: u8 = 5;
const PREC_POSTFIX: u8 = 6;
const PREC_ATOM: u8 = 7;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Exists(_) | Formula::Forall(_) => PREC_QUANT,
        Formula::Iff(_, _) | Formula::Neq(_, _) => PREC_IFF,
        Formula::Implies(_, _) => PREC_IMPLIES,
        Formula::Or(_, _) => PREC_OR,
        Formula::And(_, _) => PREC_AND,
        Formula::Not(_) => PREC_NOT,
        Formula::Evidence { .. } => PREC_POSTFIX,
        Formula::Atom(_)
        | Formula::VotCmp { .. }
        | Formula::Mcs(_)
        | Formula::Mps(_)
        | Formula::Idp(_, _)
        | Formula::Sup(_) => PREC_ATOM,
    }
}

fn write_atom_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_plain_ident(name) && !parser::is_reserved_word(name) {
        f.write_str(name)
    } else {
        write!(f, "\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

struct AtLevel<'a>(&'a Formula, u8);

impl fmt::Display for AtLevel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let AtLevel(inner, min) = *self;
        if precedence(inner) < min {
            write!(f, "({inner})")
        } else {
            write!(f, "{inner}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(name) => write_atom_name(f, name),
            Formula::Not(a) => write!(f, "!{}", AtLevel(a, PREC_NOT)),
            Formula::And(a, b) => {
                write!(f, "{} & {}", AtLevel(a, PREC_AND), AtLevel(b, PREC_AND + 1))
            }
            Formula::Or(a, b) => {
                write!(f, "{} | {}", AtLevel(a, PREC_OR), AtLevel(b, PREC_OR + 1))
            }
            Formula::Implies(a, b) => write!(
                f,
                "{} => {}",
                AtLevel(a, PREC_IMPLIES + 1),
                AtLevel(b, PREC_IMPLIES)
            ),
            Formula::Iff(a, b) => {
                write!(f, "{} <=> {}", AtLevel(a, PREC_IFF), AtLevel(b, PREC_IFF + 1))
            }
            Formula::Neq(a, b) => {
                write!(f, "{} != {}", AtLevel(a, PREC_IFF), AtLevel(b, PREC_IFF + 1))
            }
            Formula::Evidence { base, subs, others } => {
                write!(f, "{}[", AtLevel(base, PREC_POSTFIX))?;
                let mut first = true;
                for (name, value) in subs {
                    if !first {
                        f.write_str(", ")?;
                    }
                    first = false;
                    write_atom_name(f, name)?;
                    write!(f, " := {}", *value as u8)?;
                }
                if let Some(value) = others {
                    if !first {
                        f.write_str(", ")?;
                    }
                    write!(f, "others := {}", *value as u8)?;
                }
                f.write_str("]")
            }
            Formula::VotCmp { cmp, k, operands } => {
                write!(f, "VOT({cmp} {k}; ")?;
                for (i, op) in operands.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{op}")?;
                }
                f.write_str(")")
            }
            Formula::Mcs(a) => write!(f, "MCS({a})"),
            Formula::Mps(a) => write!(f, "MPS({a})"),
            Formula::Exists(a) => write!(f, "exists {}", AtLevel(a, PREC_QUANT)),
            Formula::Forall(a) => write!(f, "forall {}", AtLevel(a, PREC_QUANT)),
            Formula::Idp(a, b) => write!(f, "IDP({a}, {b})"),
            Formula::Sup(name) => {
                f.write_str("SUP(")?;
                write_atom_name(f, name)?;
                f.write_str(")")
            }
        }
    }
}
