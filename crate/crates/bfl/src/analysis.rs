//! Query answering on top of the compiler: evaluate a status vector against
//! a formula, enumerate every satisfying vector, and repair a non-satisfying
//! vector into a closest satisfying one.
//!
//! The module also carries an exhaustive truth-table oracle
//! ([`oracle_evaluate`]) that answers the same queries by brute force,
//! independently of the diagram machinery. It exists so tests can check the
//! two implementations against each other.

use thiserror::Error;

use crate::bdd::BddRef;
use crate::compile::{CompileError, CompileResult, Compiler, ScopeMode};
use crate::ft::{FaultTree, FtError, StatusVector};
use crate::logic::{desugar, CoreFormula, Formula};

/// Answer to a `check` query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Whether the given status vector satisfies the formula.
    Vector(bool),
    /// A judgment about the tree as a whole, independent of any vector.
    Tree(bool),
}

/// One group of satisfying vectors: every in-scope event is either failed,
/// operational, or (off this cube's path) free to be either.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultCube {
    pub failed: Vec<String>,
    pub operational: Vec<String>,
    pub dont_care: Vec<String>,
}

/// All satisfying vectors of a vector-layer formula, grouped into cubes over
/// the events the compiled result depends on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSet {
    /// The events the result depends on, in tree order. Events outside the
    /// scope are unconstrained in every cube.
    pub scope: Vec<String>,
    pub cubes: Vec<ResultCube>,
    /// True when the query's outermost operator was `MPS`: the natural
    /// reading of each cube is then the set of operational events (a path
    /// set) rather than the set of failed ones.
    pub path_semantics: bool,
}

impl ResultSet {
    /// Splits every don't-care into its two cases, yielding fully determined
    /// cubes, or `None` if that would produce more than `limit` cubes.
    pub fn expanded(&self, limit: usize) -> Option<Vec<ResultCube>> {
        let mut total: usize = 0;
        for cube in &self.cubes {
            let count = 1usize.checked_shl(cube.dont_care.len() as u32)?;
            total = total.checked_add(count)?;
            if total > limit {
                return None;
            }
        }
        let mut out = Vec::with_capacity(total);
        for cube in &self.cubes {
            for mask in 0..1usize << cube.dont_care.len() {
                let extra_failed = |name: &String| {
                    cube.dont_care.iter().position(|d| d == name).is_some_and(|i| mask >> i & 1 == 1)
                };
                out.push(ResultCube {
                    failed: self
                        .scope
                        .iter()
                        .filter(|&n| cube.failed.contains(n) || extra_failed(n))
                        .cloned()
                        .collect(),
                    operational: self
                        .scope
                        .iter()
                        .filter(|&n| {
                            cube.operational.contains(n)
                                || (cube.dont_care.contains(n) && !extra_failed(n))
                        })
                        .cloned()
                        .collect(),
                    dont_care: Vec::new(),
                });
            }
        }
        Some(out)
    }
}

/// A repaired status vector: flipping the listed events made it satisfy the
/// formula, and undoing any single flip breaks it again.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub revised: StatusVector,
    /// Names of the flipped events, in tree order.
    pub flipped: Vec<String>,
}

/// What a counterexample request produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CexOutcome {
    Found(Counterexample),
    /// The vector already satisfies the formula; there is nothing to repair.
    AlreadySatisfies,
    /// No vector satisfies the formula, so no revision can.
    Unsatisfiable,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Ft(#[from] FtError),
    #[error("`{construct}` denotes a tree-level verdict, not a set of status vectors")]
    VerdictFormula { construct: &'static str },
    #[error("a status vector is required to check this formula")]
    MissingVector,
    #[error("the exhaustive oracle handles at most {ORACLE_MAX_EVENTS} basic events, this tree has {n}")]
    TooManyEventsForOracle { n: usize },
}

fn verdict_name(core: &CoreFormula) -> &'static str {
    match core {
        CoreFormula::Exists(_) => "exists",
        CoreFormula::Forall(_) => "forall",
        CoreFormula::Idp(_, _) => "IDP",
        _ => unreachable!("not a verdict operator"),
    }
}

/// Evaluation and enumeration over one fault tree, with a fixed scope mode.
pub struct Analyzer<'t> {
    compiler: Compiler<'t>,
    mode: ScopeMode,
}

impl<'t> Analyzer<'t> {
    pub fn new(ft: &'t FaultTree, mode: ScopeMode) -> Analyzer<'t> {
        Analyzer { compiler: Compiler::new(ft), mode }
    }

    pub fn fault_tree(&self) -> &'t FaultTree {
        self.compiler.fault_tree()
    }

    pub fn mode(&self) -> ScopeMode {
        self.mode
    }

    pub fn compiler(&self) -> &Compiler<'t> {
        &self.compiler
    }

    pub fn compiler_mut(&mut self) -> &mut Compiler<'t> {
        &mut self.compiler
    }

    fn checked_len(&self, b: &StatusVector) -> Result<(), AnalysisError> {
        let expected = self.fault_tree().num_basic_events();
        if b.len() == expected {
            Ok(())
        } else {
            Err(FtError::VectorLength { expected, got: b.len() }.into())
        }
    }

    /// Checks a formula. Vector-layer formulas need a vector and answer for
    /// it; verdict-layer formulas judge the tree and ignore the vector.
    /// Formulas without minimization operators are evaluated by direct
    /// substitution; everything else goes through the compiler.
    pub fn evaluate(
        &mut self,
        f: &Formula,
        b: Option<&StatusVector>,
    ) -> Result<Verdict, AnalysisError> {
        let core = desugar(f, self.fault_tree());
        if let Some(b) = b {
            self.checked_len(b)?;
            if let Some(value) = self.evaluate_direct(&core, b)? {
                return Ok(Verdict::Vector(value));
            }
        }
        self.evaluate_core(&core, b)
    }

    /// Like [`Analyzer::evaluate`] but always through compilation; exposed so
    /// tests can cross-check the two evaluation paths.
    pub fn evaluate_compiled(
        &mut self,
        f: &Formula,
        b: Option<&StatusVector>,
    ) -> Result<Verdict, AnalysisError> {
        let core = desugar(f, self.fault_tree());
        self.evaluate_core(&core, b)
    }

    fn evaluate_core(
        &mut self,
        core: &CoreFormula,
        b: Option<&StatusVector>,
    ) -> Result<Verdict, AnalysisError> {
        match self.compiler.compile_formula(core, self.mode)? {
            CompileResult::Verdict(v) => Ok(Verdict::Tree(v)),
            CompileResult::Vector(r) => {
                let b = b.ok_or(AnalysisError::MissingVector)?;
                self.checked_len(b)?;
                let value = self.compiler.manager().eval(r, |v| b.bit(v.base_index()));
                Ok(Verdict::Vector(value))
            }
        }
    }

    /// Evaluates by substituting the vector into the formula, without any
    /// diagrams. Returns `None` for formulas containing an operator that
    /// needs the full satisfying set (minimization, quantifiers,
    /// independence).
    pub fn evaluate_direct(
        &self,
        core: &CoreFormula,
        b: &StatusVector,
    ) -> Result<Option<bool>, AnalysisError> {
        let ft = self.fault_tree();
        match core {
            CoreFormula::Atom(name) => Ok(Some(ft.eval_structure(b, name)?)),
            CoreFormula::Not(a) => Ok(self.evaluate_direct(a, b)?.map(|v| !v)),
            CoreFormula::And(x, y) => {
                let (Some(x), Some(y)) =
                    (self.evaluate_direct(x, b)?, self.evaluate_direct(y, b)?)
                else {
                    return Ok(None);
                };
                Ok(Some(x && y))
            }
            CoreFormula::Evidence { base, target, value } => {
                let index = ft.basic_event_index(target).ok_or_else(|| {
                    if ft.def(target).is_some() {
                        CompileError::NotABasicEvent { name: target.clone() }
                    } else {
                        CompileError::UnknownElement { name: target.clone() }
                    }
                })?;
                let mut pinned = b.clone();
                pinned.set_bit(index, *value);
                self.evaluate_direct(base, &pinned)
            }
            CoreFormula::Mcs(_)
            | CoreFormula::Mps(_)
            | CoreFormula::Exists(_)
            | CoreFormula::Forall(_)
            | CoreFormula::Idp(_, _) => Ok(None),
        }
    }

    /// Enumerates every satisfying vector of a vector-layer formula.
    pub fn satisfying_set(&mut self, f: &Formula) -> Result<ResultSet, AnalysisError> {
        let core = desugar(f, self.fault_tree());
        let r = match self.compiler.compile_formula(&core, self.mode)? {
            CompileResult::Vector(r) => r,
            CompileResult::Verdict(_) => {
                return Err(AnalysisError::VerdictFormula { construct: verdict_name(&core) })
            }
        };
        let ft = self.fault_tree();
        let scope_idx = self.compiler.scope_of(r, ScopeMode::Support);
        let name_of = |i: usize| ft.basic_event_order()[i].clone();
        let scope: Vec<String> = scope_idx.iter().map(|&i| name_of(i)).collect();
        let cubes = self
            .compiler
            .manager()
            .sat_cubes(r)
            .into_iter()
            .map(|cube| {
                let mut failed = Vec::new();
                let mut operational = Vec::new();
                for (var, value) in &cube.assignments {
                    if *value {
                        failed.push(name_of(var.base_index()));
                    } else {
                        operational.push(name_of(var.base_index()));
                    }
                }
                let dont_care = scope
                    .iter()
                    .filter(|&n| !failed.contains(n) && !operational.contains(n))
                    .cloned()
                    .collect();
                ResultCube { failed, operational, dont_care }
            })
            .collect();
        Ok(ResultSet {
            scope,
            cubes,
            path_semantics: matches!(core, CoreFormula::Mps(_)),
        })
    }

    /// Repairs a vector that misses a vector-layer formula by walking the
    /// compiled diagram in variable order: keep each event's given status
    /// unless that edge leads into the 0-terminal, in which case flip it.
    /// Every flip is forced, so undoing any single one falsifies the formula
    /// again.
    pub fn counterexample(
        &mut self,
        f: &Formula,
        b: &StatusVector,
    ) -> Result<CexOutcome, AnalysisError> {
        let core = desugar(f, self.fault_tree());
        let r = match self.compiler.compile_formula(&core, self.mode)? {
            CompileResult::Vector(r) => r,
            CompileResult::Verdict(_) => {
                return Err(AnalysisError::VerdictFormula { construct: verdict_name(&core) })
            }
        };
        self.checked_len(b)?;
        if r == BddRef::FALSE {
            return Ok(CexOutcome::Unsatisfiable);
        }
        let man = self.compiler.manager();
        if man.eval(r, |v| b.bit(v.base_index())) {
            return Ok(CexOutcome::AlreadySatisfies);
        }
        let mut revised = b.clone();
        let mut flipped = Vec::new();
        let mut node = r;
        while let Some((var, lo, hi)) = man.node(node) {
            let index = var.base_index();
            let keep = if revised.bit(index) { hi } else { lo };
            if keep == BddRef::FALSE {
                let flipped_to = !revised.bit(index);
                revised.set_bit(index, flipped_to);
                flipped.push(self.fault_tree().basic_event_order()[index].clone());
                node = if flipped_to { hi } else { lo };
            } else {
                node = keep;
            }
        }
        debug_assert_eq!(node, BddRef::TRUE);
        debug_assert!(!flipped.is_empty(), "a non-satisfying vector needs at least one flip");
        Ok(CexOutcome::Found(Counterexample { revised, flipped }))
    }
}

/// Upper bound on tree size for the exhaustive oracle (2^16 table entries).
pub const ORACLE_MAX_EVENTS: usize = 16;

/// What the oracle computed: the full truth table of a vector-layer formula
/// (indexed by [`StatusVector::to_index`]) or a tree-level verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleResult {
    Vector(Vec<bool>),
    Tree(bool),
}

/// Answers a query by brute force over all `2^n` status vectors, using only
/// the structure function — no diagrams involved. Testing aid.
pub fn oracle_evaluate(
    ft: &FaultTree,
    core: &CoreFormula,
    mode: ScopeMode,
) -> Result<OracleResult, AnalysisError> {
    let n = ft.num_basic_events();
    if n > ORACLE_MAX_EVENTS {
        return Err(AnalysisError::TooManyEventsForOracle { n });
    }
    match core {
        CoreFormula::Exists(a) => {
            Ok(OracleResult::Tree(oracle_table(ft, a, mode)?.iter().any(|&x| x)))
        }
        CoreFormula::Forall(a) => {
            Ok(OracleResult::Tree(oracle_table(ft, a, mode)?.iter().all(|&x| x)))
        }
        CoreFormula::Idp(a, b) => {
            let ta = oracle_table(ft, a, mode)?;
            let tb = oracle_table(ft, b, mode)?;
            let shared = sensitivity_mask(&ta) & sensitivity_mask(&tb);
            Ok(OracleResult::Tree(shared == 0))
        }
        _ => Ok(OracleResult::Vector(oracle_table(ft, core, mode)?)),
    }
}

fn oracle_table(
    ft: &FaultTree,
    core: &CoreFormula,
    mode: ScopeMode,
) -> Result<Vec<bool>, AnalysisError> {
    let n = ft.num_basic_events();
    let size = 1usize << n;
    match core {
        CoreFormula::Atom(name) => (0..size)
            .map(|idx| Ok(ft.eval_structure(&StatusVector::from_index(idx, n), name)?))
            .collect(),
        CoreFormula::Not(a) => {
            Ok(oracle_table(ft, a, mode)?.into_iter().map(|v| !v).collect())
        }
        CoreFormula::And(a, b) => {
            let ta = oracle_table(ft, a, mode)?;
            let tb = oracle_table(ft, b, mode)?;
            Ok(ta.into_iter().zip(tb).map(|(x, y)| x && y).collect())
        }
        CoreFormula::Evidence { base, target, value } => {
            let index = ft.basic_event_index(target).ok_or_else(|| {
                if ft.def(target).is_some() {
                    CompileError::NotABasicEvent { name: target.clone() }
                } else {
                    CompileError::UnknownElement { name: target.clone() }
                }
            })?;
            let tb = oracle_table(ft, base, mode)?;
            Ok((0..size)
                .map(|idx| {
                    let pinned =
                        if *value { idx | 1 << index } else { idx & !(1 << index) };
                    tb[pinned]
                })
                .collect())
        }
        CoreFormula::Mcs(a) => {
            let sat = oracle_table(ft, a, mode)?;
            let scope = oracle_scope_mask(&sat, n, mode);
            Ok(oracle_minimal(&sat, scope))
        }
        CoreFormula::Mps(a) => {
            let sat = oracle_table(ft, a, mode)?;
            let scope = oracle_scope_mask(&sat, n, mode);
            let unsat: Vec<bool> = sat.iter().map(|&v| !v).collect();
            Ok(oracle_maximal(&unsat, scope))
        }
        CoreFormula::Exists(_) => {
            Err(CompileError::NestedVerdict { construct: "exists" }.into())
        }
        CoreFormula::Forall(_) => {
            Err(CompileError::NestedVerdict { construct: "forall" }.into())
        }
        CoreFormula::Idp(_, _) => Err(CompileError::NestedVerdict { construct: "IDP" }.into()),
    }
}

/// Bit `i` is set when some pair of vectors differing only at event `i`
/// disagrees on the table — the semantic notion of "influences".
fn sensitivity_mask(table: &[bool]) -> usize {
    let mut mask = 0usize;
    for (idx, &v) in table.iter().enumerate() {
        let mut remaining = !idx & (table.len() - 1);
        while remaining != 0 {
            let bit = remaining & remaining.wrapping_neg();
            if table[idx | bit] != v {
                mask |= bit;
            }
            remaining ^= bit;
        }
    }
    mask
}

fn oracle_scope_mask(table: &[bool], n: usize, mode: ScopeMode) -> usize {
    match mode {
        ScopeMode::Support => sensitivity_mask(table),
        ScopeMode::Global => (1usize << n) - 1,
    }
}

/// Keeps entries with no strictly smaller satisfying scope assignment
/// (off-scope bits held fixed).
fn oracle_minimal(sat: &[bool], scope: usize) -> Vec<bool> {
    sat.iter()
        .enumerate()
        .map(|(idx, &v)| {
            if !v {
                return false;
            }
            let within = idx & scope;
            if within == 0 {
                return true;
            }
            let outside = idx & !scope;
            let mut m = (within - 1) & within;
            loop {
                if sat[outside | m] {
                    return false;
                }
                if m == 0 {
                    return true;
                }
                m = (m - 1) & within;
            }
        })
        .collect()
}

/// Keeps entries with no strictly larger scope assignment still in the set.
fn oracle_maximal(set: &[bool], scope: usize) -> Vec<bool> {
    set.iter()
        .enumerate()
        .map(|(idx, &v)| {
            if !v {
                return false;
            }
            let missing = scope & !idx;
            if missing == 0 {
                return true;
            }
            let mut m = missing;
            loop {
                if set[idx | m] {
                    return false;
                }
                m = (m - 1) & missing;
                if m == 0 {
                    return true;
                }
            }
        })
        .collect()
}
