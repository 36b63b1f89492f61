//! Static fault tree model: elements, status vectors, structure function,
//! well-formedness checks, and the text format.
//!
//! A tree is a DAG of AND/OR/VOT gates over shared basic events, with a
//! single top-level element. Status vectors assign one failure bit per basic
//! event, in `basic_event_order`.

mod parser;

pub use crate::lex::ParseError;
pub use parser::{parse_fault_tree, parse_unvalidated};

use indexmap::IndexMap;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

use crate::lex::is_plain_ident;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateType {
    And,
    Or,
    /// Fails when at least `k` children fail (children counted with multiplicity).
    Vot { k: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementDef {
    Basic,
    Gate { gate: GateType, children: Vec<String> },
}

impl ElementDef {
    pub fn is_basic(&self) -> bool {
        matches!(self, ElementDef::Basic)
    }
}

/// A static fault tree. Construct via [`parse_fault_tree`] or [`FaultTree::new`];
/// only validated trees may be analyzed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultTree {
    elements: IndexMap<String, ElementDef>,
    top: String,
    be_order: Vec<String>,
    be_index: HashMap<String, usize>,
}

impl FaultTree {
    /// Builds a tree from parts without validating it; `be_order` is derived
    /// from the iteration order of `elements` (basic entries only). Run
    /// [`validate`] before analysis.
    pub fn new(elements: IndexMap<String, ElementDef>, top: String) -> FaultTree {
        let be_order: Vec<String> = elements
            .iter()
            .filter(|(_, d)| d.is_basic())
            .map(|(n, _)| n.clone())
            .collect();
        let be_index = be_order
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        FaultTree { elements, top, be_order, be_index }
    }

    pub fn top(&self) -> &str {
        &self.top
    }

    pub fn elements(&self) -> impl Iterator<Item = (&str, &ElementDef)> {
        self.elements.iter().map(|(n, d)| (n.as_str(), d))
    }

    pub fn def(&self, name: &str) -> Option<&ElementDef> {
        self.elements.get(name)
    }

    pub fn is_basic_event(&self, name: &str) -> bool {
        matches!(self.elements.get(name), Some(ElementDef::Basic))
    }

    /// Basic events in order of first textual occurrence; defines vector layout
    /// and the BDD variable order.
    pub fn basic_event_order(&self) -> &[String] {
        &self.be_order
    }

    pub fn basic_event_index(&self, name: &str) -> Option<usize> {
        self.be_index.get(name).copied()
    }

    pub fn num_basic_events(&self) -> usize {
        self.be_order.len()
    }

    /// Structural well-formedness report; empty means the tree is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        match self.elements.get(&self.top) {
            None => violations.push(Violation::UnknownTop { name: self.top.clone() }),
            Some(ElementDef::Basic) => {
                violations.push(Violation::TopNotGate { name: self.top.clone() })
            }
            Some(ElementDef::Gate { .. }) => {}
        }

        for (name, def) in &self.elements {
            if let ElementDef::Gate { gate, children } = def {
                if children.is_empty() {
                    violations.push(Violation::EmptyChildren { gate: name.clone() });
                }
                for c in children {
                    if !self.elements.contains_key(c) {
                        violations.push(Violation::UndefinedReference {
                            gate: name.clone(),
                            child: c.clone(),
                        });
                    }
                }
                if let GateType::Vot { k } = gate {
                    let n = children.len();
                    if n < 2 || *k < 1 || *k as usize > n {
                        violations.push(Violation::VotArity { gate: name.clone(), k: *k, n });
                    }
                }
            }
        }

        // Cycle check over all elements, not just the part reachable from top.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            InProgress,
            Done,
        }
        let mut marks: HashMap<&str, Mark> = HashMap::new();
        let mut reported_cycle = false;
        for name in self.elements.keys() {
            if marks.contains_key(name.as_str()) {
                continue;
            }
            // Iterative DFS with an explicit path for cycle reporting.
            let mut stack: Vec<(&str, usize)> = vec![(name.as_str(), 0)];
            let mut path: Vec<&str> = Vec::new();
            while let Some((n, ci)) = stack.pop() {
                if ci == 0 {
                    if marks.get(n) == Some(&Mark::Done) {
                        continue;
                    }
                    marks.insert(n, Mark::InProgress);
                    path.push(n);
                }
                let children = match self.elements.get(n) {
                    Some(ElementDef::Gate { children, .. }) => children.as_slice(),
                    _ => &[],
                };
                if ci < children.len() {
                    stack.push((n, ci + 1));
                    let c = children[ci].as_str();
                    match marks.get(c) {
                        Some(Mark::InProgress) => {
                            if !reported_cycle {
                                let start = path.iter().position(|&p| p == c).unwrap_or(0);
                                let mut cyc: Vec<String> =
                                    path[start..].iter().map(|s| s.to_string()).collect();
                                cyc.push(c.to_string());
                                violations.push(Violation::Cycle { path: cyc });
                                reported_cycle = true;
                            }
                        }
                        Some(Mark::Done) => {}
                        None => {
                            if self.elements.contains_key(c) {
                                stack.push((c, 0));
                            }
                        }
                    }
                } else {
                    marks.insert(n, Mark::Done);
                    path.pop();
                }
            }
        }

        // Reachability from the top element.
        if self.elements.contains_key(&self.top) && !reported_cycle {
            let mut reached: HashMap<&str, ()> = HashMap::new();
            let mut stack = vec![self.top.as_str()];
            while let Some(n) = stack.pop() {
                if reached.insert(n, ()).is_some() {
                    continue;
                }
                if let Some(ElementDef::Gate { children, .. }) = self.elements.get(n) {
                    for c in children {
                        if self.elements.contains_key(c.as_str()) {
                            stack.push(c.as_str());
                        }
                    }
                }
            }
            for name in self.elements.keys() {
                if !reached.contains_key(name.as_str()) {
                    violations.push(Violation::Unreachable { element: name.clone() });
                }
            }
        }

        ValidationReport { violations }
    }

    /// Failure state of `element` under status vector `b`.
    ///
    /// Panics on cyclic trees and unvalidated dangling references; run
    /// [`FaultTree::validate`] first. Errors on unknown element names and
    /// vector length mismatches.
    pub fn eval_structure(&self, b: &StatusVector, element: &str) -> Result<bool, FtError> {
        if b.len() != self.be_order.len() {
            return Err(FtError::VectorLength { expected: self.be_order.len(), got: b.len() });
        }
        if !self.elements.contains_key(element) {
            return Err(FtError::UnknownElement { name: element.to_string() });
        }
        let mut memo: HashMap<&str, bool> = HashMap::new();
        Ok(self.eval_rec(b, element, &mut memo, 0))
    }

    fn eval_rec<'a>(
        &'a self,
        b: &StatusVector,
        element: &'a str,
        memo: &mut HashMap<&'a str, bool>,
        depth: usize,
    ) -> bool {
        if let Some(&v) = memo.get(element) {
            return v;
        }
        assert!(
            depth <= self.elements.len(),
            "eval_structure on a cyclic tree (element `{element}`); validate first"
        );
        let def = self
            .elements
            .get(element)
            .unwrap_or_else(|| panic!("dangling reference `{element}`; validate first"));
        let v = match def {
            ElementDef::Basic => b.bit(self.be_index[element]),
            ElementDef::Gate { gate, children } => {
                let failed = children
                    .iter()
                    .filter(|c| self.eval_rec(b, c, memo, depth + 1))
                    .count();
                match gate {
                    GateType::And => failed == children.len(),
                    GateType::Or => failed > 0,
                    GateType::Vot { k } => failed >= *k as usize,
                }
            }
        };
        memo.insert(element, v);
        v
    }

    /// Renders the tree in the text format; `parse_fault_tree` of the output
    /// reproduces the tree exactly, including `basic_event_order`.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("toplevel {};\n", quote_name(&self.top)));
        for (name, def) in &self.elements {
            if let ElementDef::Gate { gate, children } = def {
                let kids: Vec<String> = children.iter().map(|c| quote_name(c)).collect();
                let body = match gate {
                    GateType::And => format!("and({})", kids.join(", ")),
                    GateType::Or => format!("or({})", kids.join(", ")),
                    GateType::Vot { k } => format!("vot({}; {})", k, kids.join(", ")),
                };
                out.push_str(&format!("{} = {};\n", quote_name(name), body));
            }
        }
        out
    }

    /// GraphViz rendering of the tree; with a vector, failed elements are
    /// drawn filled. Output is deterministic byte for byte.
    pub fn to_dot(&self, b: Option<&StatusVector>) -> Result<String, FtError> {
        let mut out = String::from("digraph fault_tree {\n  rankdir=TB;\n");
        for (name, def) in &self.elements {
            let failed = match b {
                Some(v) => self.eval_structure(v, name)?,
                None => false,
            };
            let fill = if failed { ", style=filled, fillcolor=lightcoral" } else { "" };
            match def {
                ElementDef::Basic => {
                    out.push_str(&format!("  {} [shape=ellipse{}];\n", dot_id(name), fill));
                }
                ElementDef::Gate { gate, children } => {
                    let label = match gate {
                        GateType::And => format!("{name}\\nAND"),
                        GateType::Or => format!("{name}\\nOR"),
                        GateType::Vot { k } => format!("{name}\\nVOT({k}/{})", children.len()),
                    };
                    out.push_str(&format!(
                        "  {} [shape=box, label=\"{}\"{}];\n",
                        dot_id(name),
                        label.replace('"', "\\\""),
                        fill
                    ));
                }
            }
        }
        for (name, def) in &self.elements {
            if let ElementDef::Gate { children, .. } = def {
                for c in children {
                    out.push_str(&format!("  {} -> {};\n", dot_id(name), dot_id(c)));
                }
            }
        }
        out.push_str("}\n");
        Ok(out)
    }
}

fn quote_name(name: &str) -> String {
    if is_plain_ident(name) && name != "toplevel" {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

fn dot_id(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Failure states of the basic events of one tree, in `basic_event_order`.
/// `true` means failed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StatusVector {
    bits: Vec<bool>,
}

impl StatusVector {
    pub fn new(bits: Vec<bool>) -> StatusVector {
        StatusVector { bits }
    }

    pub fn all_zeros(n: usize) -> StatusVector {
        StatusVector { bits: vec![false; n] }
    }

    /// Builds a vector from `name = bit` assignments. Unassigned basic events
    /// default to 0 and are returned for caller-side warnings; with `strict`
    /// they are an error instead.
    pub fn from_assignments(
        ft: &FaultTree,
        pairs: &[(String, bool)],
        strict: bool,
    ) -> Result<(StatusVector, Vec<String>), FtError> {
        let mut bits = vec![None; ft.num_basic_events()];
        for (name, bit) in pairs {
            let i = match ft.basic_event_index(name) {
                Some(i) => i,
                None => {
                    if ft.def(name).is_some() {
                        return Err(FtError::NotABasicEvent { name: name.clone() });
                    }
                    return Err(FtError::UnknownElement { name: name.clone() });
                }
            };
            if bits[i].is_some() {
                return Err(FtError::DuplicateAssignment { name: name.clone() });
            }
            bits[i] = Some(*bit);
        }
        let defaulted: Vec<String> = ft
            .basic_event_order()
            .iter()
            .enumerate()
            .filter(|(i, _)| bits[*i].is_none())
            .map(|(_, n)| n.clone())
            .collect();
        if strict && !defaulted.is_empty() {
            return Err(FtError::UnassignedBasicEvents { names: defaulted });
        }
        Ok((StatusVector { bits: bits.into_iter().map(|b| b.unwrap_or(false)).collect() }, defaulted))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set_bit(&mut self, i: usize, v: bool) {
        self.bits[i] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Index into a truth table over all vectors: bit i contributes 2^i.
    pub fn to_index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    pub fn from_index(idx: usize, n: usize) -> StatusVector {
        StatusVector { bits: (0..n).map(|i| idx >> i & 1 == 1).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownTop { name: String },
    TopNotGate { name: String },
    Cycle { path: Vec<String> },
    Unreachable { element: String },
    EmptyChildren { gate: String },
    UndefinedReference { gate: String, child: String },
    VotArity { gate: String, k: u32, n: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownTop { name } => {
                write!(f, "top-level element `{name}` is not defined")
            }
            Violation::TopNotGate { name } => {
                write!(f, "top-level element `{name}` is a basic event, not a gate")
            }
            Violation::Cycle { path } => write!(f, "cycle: {}", path.join(" -> ")),
            Violation::Unreachable { element } => {
                write!(f, "element `{element}` is not reachable from the top-level element")
            }
            Violation::EmptyChildren { gate } => write!(f, "gate `{gate}` has no children"),
            Violation::UndefinedReference { gate, child } => {
                write!(f, "gate `{gate}` references undefined element `{child}`")
            }
            Violation::VotArity { gate, k, n } => write!(
                f,
                "gate `{gate}`: vot({k}; ...) needs 1 <= k <= n and n >= 2, has n = {n}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FtError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("invalid fault tree: {0}")]
    Invalid(ValidationReport),
    #[error("unknown element `{name}`")]
    UnknownElement { name: String },
    #[error("`{name}` is not a basic event")]
    NotABasicEvent { name: String },
    #[error("status vector has {got} bits, tree has {expected} basic events")]
    VectorLength { expected: usize, got: usize },
    #[error("basic event `{name}` assigned twice")]
    DuplicateAssignment { name: String },
    #[error("unassigned basic events: {}", names.join(", "))]
    UnassignedBasicEvents { names: Vec<String> },
}
