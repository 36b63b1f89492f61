//! Compilation of fault trees and formulas to decision diagrams.
//!
//! Basic event `i` becomes the plain diagram variable at level `2i`. The
//! minimization operators compare a vector against candidate smaller or
//! larger vectors; the candidate lives in the primed shadow variables, gets
//! related to the plain ones by a strict subset or superset relation, and is
//! existentially quantified away again, so results always come back over
//! plain variables only.

use std::collections::HashMap;

use thiserror::Error;

use crate::bdd::{BddManager, BddRef, VarId};
use crate::ft::{ElementDef, FaultTree, GateType};
use crate::logic::CoreFormula;

/// Which basic events the minimization operators and result sets range over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ScopeMode {
    /// The events the operand formula actually depends on. An event the
    /// operand never reads stays a don't-care, so `MCS(e1) & MCS(e3)` keeps
    /// its joint solutions.
    #[default]
    Support,
    /// Every basic event of the tree. Minimal vectors then pin all other
    /// events to 0, so `MCS(e1) & MCS(e3)` becomes unsatisfiable.
    Global,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("unknown element `{name}`")]
    UnknownElement { name: String },
    #[error("evidence can only fix basic events, and `{name}` is a gate")]
    NotABasicEvent { name: String },
    #[error("`{construct}` yields a tree-level verdict and can only appear outermost")]
    NestedVerdict { construct: &'static str },
}

/// Outcome of compiling a formula: vector-layer formulas denote a set of
/// status vectors, verdict-layer formulas a single boolean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompileResult {
    Vector(BddRef),
    Verdict(bool),
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CacheStats {
    pub element_hits: usize,
    pub element_misses: usize,
    pub formula_hits: usize,
    pub formula_misses: usize,
}

/// Compiles elements and formulas of one fault tree, sharing one diagram
/// manager and memoizing per element name and per formula value.
///
/// The tree is assumed structurally valid (see [`FaultTree::validate`]);
/// compiling an element of a cyclic tree would recurse forever.
pub struct Compiler<'t> {
    ft: &'t FaultTree,
    man: BddManager,
    element_cache: HashMap<String, BddRef>,
    formula_cache: HashMap<(CoreFormula, ScopeMode), BddRef>,
    /// Strict order relations between the plain and primed copy of a scope,
    /// keyed by (scope, primed-is-smaller).
    relation_cache: HashMap<(Vec<usize>, bool), BddRef>,
    stats: CacheStats,
}

impl<'t> Compiler<'t> {
    pub fn new(ft: &'t FaultTree) -> Compiler<'t> {
        Compiler {
            ft,
            man: BddManager::new(),
            element_cache: HashMap::new(),
            formula_cache: HashMap::new(),
            relation_cache: HashMap::new(),
            stats: CacheStats::default(),
        }
    }

    pub fn fault_tree(&self) -> &'t FaultTree {
        self.ft
    }

    pub fn manager(&self) -> &BddManager {
        &self.man
    }

    pub fn manager_mut(&mut self) -> &mut BddManager {
        &mut self.man
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    /// The diagram of the structure function at `name`: true exactly on the
    /// status vectors under which the element fails.
    pub fn compile_element(&mut self, name: &str) -> Result<BddRef, CompileError> {
        if let Some(&r) = self.element_cache.get(name) {
            self.stats.element_hits += 1;
            return Ok(r);
        }
        self.stats.element_misses += 1;
        let ft = self.ft;
        let def = ft
            .def(name)
            .ok_or_else(|| CompileError::UnknownElement { name: name.to_string() })?;
        let r = match def {
            ElementDef::Basic => {
                let index = ft.basic_event_index(name).expect("basic event has an index");
                self.man.var(VarId::plain(index))
            }
            ElementDef::Gate { gate, children } => {
                let kids = children
                    .iter()
                    .map(|c| self.compile_element(c))
                    .collect::<Result<Vec<_>, _>>()?;
                match gate {
                    GateType::And => {
                        let mut acc = BddRef::TRUE;
                        for k in kids {
                            acc = self.man.and(acc, k);
                        }
                        acc
                    }
                    GateType::Or => {
                        let mut acc = BddRef::FALSE;
                        for k in kids {
                            acc = self.man.or(acc, k);
                        }
                        acc
                    }
                    GateType::Vot { k } => self.at_least_of(*k as usize, &kids),
                }
            }
        };
        self.element_cache.insert(name.to_string(), r);
        Ok(r)
    }

    /// "At least `need` of `inputs` are true", built bottom-up over
    /// (position, still-needed) subproblems. Duplicated inputs count once
    /// per occurrence.
    fn at_least_of(&mut self, need: usize, inputs: &[BddRef]) -> BddRef {
        let n = inputs.len();
        if need == 0 {
            return BddRef::TRUE;
        }
        if need > n {
            return BddRef::FALSE;
        }
        // table[j][c]: at least c of inputs[j..] are true.
        let mut next: Vec<BddRef> = vec![BddRef::FALSE; need + 1];
        next[0] = BddRef::TRUE;
        for j in (0..n).rev() {
            let mut row = vec![BddRef::TRUE; need + 1];
            let remaining = n - j;
            for c in 1..=need {
                row[c] = if c > remaining {
                    BddRef::FALSE
                } else {
                    self.man.ite(inputs[j], next[c - 1], next[c])
                };
            }
            next = row;
        }
        next[need]
    }

    /// Compiles a whole query. Verdict operators are only legal at the root;
    /// anywhere deeper they surface as [`CompileError::NestedVerdict`].
    pub fn compile_formula(
        &mut self,
        f: &CoreFormula,
        mode: ScopeMode,
    ) -> Result<CompileResult, CompileError> {
        match f {
            CoreFormula::Exists(a) => {
                let r = self.vector(a, mode)?;
                Ok(CompileResult::Verdict(r != BddRef::FALSE))
            }
            CoreFormula::Forall(a) => {
                let r = self.vector(a, mode)?;
                Ok(CompileResult::Verdict(r == BddRef::TRUE))
            }
            CoreFormula::Idp(a, b) => {
                let independent = self.independent(a, b, mode)?;
                Ok(CompileResult::Verdict(independent))
            }
            _ => Ok(CompileResult::Vector(self.vector(f, mode)?)),
        }
    }

    /// The diagram of a vector-layer formula, over plain variables.
    pub fn vector(&mut self, f: &CoreFormula, mode: ScopeMode) -> Result<BddRef, CompileError> {
        let key = (f.clone(), mode);
        if let Some(&r) = self.formula_cache.get(&key) {
            self.stats.formula_hits += 1;
            return Ok(r);
        }
        self.stats.formula_misses += 1;
        let r = match f {
            CoreFormula::Atom(name) => self.compile_element(name)?,
            CoreFormula::Not(a) => {
                let a = self.vector(a, mode)?;
                self.man.negate(a)
            }
            CoreFormula::And(a, b) => {
                let a = self.vector(a, mode)?;
                let b = self.vector(b, mode)?;
                self.man.and(a, b)
            }
            CoreFormula::Evidence { base, target, value } => {
                let index = self.ft.basic_event_index(target).ok_or_else(|| {
                    if self.ft.def(target).is_some() {
                        CompileError::NotABasicEvent { name: target.clone() }
                    } else {
                        CompileError::UnknownElement { name: target.clone() }
                    }
                })?;
                let base = self.vector(base, mode)?;
                self.man.restrict(base, VarId::plain(index), *value)
            }
            CoreFormula::Mcs(a) => {
                let a = self.vector(a, mode)?;
                self.minimize_cuts(a, mode)
            }
            CoreFormula::Mps(a) => {
                let a = self.vector(a, mode)?;
                self.maximize_paths(a, mode)
            }
            CoreFormula::Exists(_) => {
                return Err(CompileError::NestedVerdict { construct: "exists" })
            }
            CoreFormula::Forall(_) => {
                return Err(CompileError::NestedVerdict { construct: "forall" })
            }
            CoreFormula::Idp(_, _) => {
                return Err(CompileError::NestedVerdict { construct: "IDP" })
            }
        };
        self.formula_cache.insert(key, r);
        Ok(r)
    }

    /// Basic-event indices the minimization scope ranges over for a diagram.
    pub fn scope_of(&self, b: BddRef, mode: ScopeMode) -> Vec<usize> {
        match mode {
            ScopeMode::Support => self
                .man
                .support(b)
                .into_iter()
                .map(|v| {
                    debug_assert!(!v.is_primed());
                    v.base_index()
                })
                .collect(),
            ScopeMode::Global => (0..self.ft.num_basic_events()).collect(),
        }
    }

    /// Keeps exactly the satisfying vectors that are minimal within the
    /// scope: no strictly smaller scope assignment also satisfies.
    pub fn minimize_cuts(&mut self, b: BddRef, mode: ScopeMode) -> BddRef {
        let scope = self.scope_of(b, mode);
        let relation = self.strict_order(&scope, true);
        self.keep_extremal(b, relation, &scope)
    }

    /// Keeps exactly the non-satisfying vectors that are maximal within the
    /// scope: every strictly larger scope assignment satisfies. The zeros of
    /// such a vector name a minimal path set.
    pub fn maximize_paths(&mut self, b: BddRef, mode: ScopeMode) -> BddRef {
        let scope = self.scope_of(b, mode);
        let complement = self.man.negate(b);
        let relation = self.strict_order(&scope, false);
        self.keep_extremal(complement, relation, &scope)
    }

    /// `b` minus every vector for which the relation produces a competing
    /// witness (in the primed copy) that also lies in `b`.
    fn keep_extremal(&mut self, b: BddRef, relation: BddRef, scope: &[usize]) -> BddRef {
        let renamed = self.man.rename_to_primed(b);
        let witness = self.man.and(relation, renamed);
        let primed: Vec<VarId> = scope.iter().map(|&i| VarId::primed(i)).collect();
        let beaten = self.man.exists(witness, &primed);
        let not_beaten = self.man.negate(beaten);
        self.man.and(b, not_beaten)
    }

    /// The strict order between the primed and plain copy of the scope:
    /// with `primed_smaller`, "primed ⊂ plain"; otherwise "primed ⊃ plain".
    fn strict_order(&mut self, scope: &[usize], primed_smaller: bool) -> BddRef {
        let key = (scope.to_vec(), primed_smaller);
        if let Some(&r) = self.relation_cache.get(&key) {
            return r;
        }
        let mut weak = BddRef::TRUE; // pointwise ≤ in the chosen direction
        let mut reverse = BddRef::TRUE; // pointwise ≥, negated below for strictness
        for &i in scope {
            let plain = self.man.var(VarId::plain(i));
            let primed = self.man.var(VarId::primed(i));
            let (small, large) = if primed_smaller {
                (primed, plain)
            } else {
                (plain, primed)
            };
            let le = self.man.implies(small, large);
            let ge = self.man.implies(large, small);
            weak = self.man.and(weak, le);
            reverse = self.man.and(reverse, ge);
        }
        let not_equal = self.man.negate(reverse);
        let r = self.man.and(weak, not_equal);
        self.relation_cache.insert(key, r);
        r
    }

    /// Sorted indices of the basic events a formula's meaning depends on.
    pub fn influencing_basic_events(
        &mut self,
        f: &CoreFormula,
        mode: ScopeMode,
    ) -> Result<Vec<usize>, CompileError> {
        let r = self.vector(f, mode)?;
        Ok(self.scope_of(r, ScopeMode::Support))
    }

    /// Two formulas are independent when no basic event influences both.
    pub fn independent(
        &mut self,
        a: &CoreFormula,
        b: &CoreFormula,
        mode: ScopeMode,
    ) -> Result<bool, CompileError> {
        let sa = self.influencing_basic_events(a, mode)?;
        let sb = self.influencing_basic_events(b, mode)?;
        let sb: std::collections::HashSet<usize> = sb.into_iter().collect();
        Ok(!sa.iter().any(|i| sb.contains(i)))
    }
}
