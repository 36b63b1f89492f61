//! Reduced ordered binary decision diagrams with a hash-consed node table.
//!
//! All nodes live in one arena owned by a [`BddManager`]; a [`BddRef`] is an
//! index into it. Because construction goes through [`BddManager::mk_node`],
//! which removes redundant tests and shares structurally equal nodes, two
//! semantically equivalent functions always end up as the same `BddRef`.
//! Equality checks are therefore pointer comparisons.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

/// A decision variable, identified by its position in the global order.
///
/// Every basic event `i` owns two adjacent levels: the plain variable at
/// level `2i` and a primed shadow copy at level `2i + 1` used when a relation
/// compares two status vectors (subset and superset tests). Interleaving the
/// copies keeps renaming plain to primed order-preserving.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(u32);

impl VarId {
    pub fn plain(index: usize) -> VarId {
        VarId(2 * index as u32)
    }

    pub fn primed(index: usize) -> VarId {
        VarId(2 * index as u32 + 1)
    }

    pub fn is_primed(self) -> bool {
        self.0 % 2 == 1
    }

    /// The basic-event index this variable (plain or primed) stands for.
    pub fn base_index(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn level(self) -> u32 {
        self.0
    }

    pub fn to_primed(self) -> VarId {
        VarId(self.0 | 1)
    }
}

/// A handle to a node in a [`BddManager`]. Valid only with the manager that
/// produced it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BddRef(u32);

impl BddRef {
    pub const FALSE: BddRef = BddRef(0);
    pub const TRUE: BddRef = BddRef(1);

    pub fn is_terminal(self) -> bool {
        self.0 <= 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Implies,
}

impl BinOp {
    fn eval(self, a: bool, b: bool) -> bool {
        match self {
            BinOp::And => a && b,
            BinOp::Or => a || b,
            BinOp::Xor => a != b,
            BinOp::Implies => !a || b,
        }
    }

    fn commutes(self) -> bool {
        !matches!(self, BinOp::Implies)
    }
}

/// One satisfying cube: assignments for the variables tested on a root-to-1
/// path, in variable order. Variables absent from the list are don't-cares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cube {
    pub assignments: Vec<(VarId, bool)>,
}

#[derive(Clone, Copy)]
struct Node {
    var: VarId,
    lo: BddRef,
    hi: BddRef,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum OpKey {
    Bin(BinOp, BddRef, BddRef),
    Restrict(BddRef, VarId, bool),
    Rename(BddRef),
}

/// Terminals carry a level below every real variable's.
const TERMINAL_LEVEL: u32 = u32::MAX;

pub struct BddManager {
    nodes: Vec<Node>,
    unique: HashMap<(VarId, BddRef, BddRef), BddRef>,
    cache: HashMap<OpKey, BddRef>,
}

impl Default for BddManager {
    fn default() -> Self {
        Self::new()
    }
}

impl BddManager {
    pub fn new() -> BddManager {
        let terminal = |r| Node {
            var: VarId(TERMINAL_LEVEL),
            lo: r,
            hi: r,
        };
        BddManager {
            nodes: vec![terminal(BddRef::FALSE), terminal(BddRef::TRUE)],
            unique: HashMap::new(),
            cache: HashMap::new(),
        }
    }

    pub fn constant(&self, value: bool) -> BddRef {
        if value {
            BddRef::TRUE
        } else {
            BddRef::FALSE
        }
    }

    /// The single-variable function "var is 1".
    pub fn var(&mut self, var: VarId) -> BddRef {
        self.mk_node(var, BddRef::FALSE, BddRef::TRUE)
    }

    pub fn literal(&mut self, var: VarId, positive: bool) -> BddRef {
        if positive {
            self.var(var)
        } else {
            self.mk_node(var, BddRef::TRUE, BddRef::FALSE)
        }
    }

    /// The canonical node for `if var then hi else lo`, reusing an existing
    /// node when possible and eliding the test when both branches agree.
    pub fn mk_node(&mut self, var: VarId, lo: BddRef, hi: BddRef) -> BddRef {
        if lo == hi {
            return lo;
        }
        debug_assert!(var.level() < self.level(lo) && var.level() < self.level(hi));
        if let Some(&r) = self.unique.get(&(var, lo, hi)) {
            return r;
        }
        let r = BddRef(u32::try_from(self.nodes.len()).expect("node table overflow"));
        self.nodes.push(Node { var, lo, hi });
        self.unique.insert((var, lo, hi), r);
        r
    }

    fn level(&self, r: BddRef) -> u32 {
        self.nodes[r.0 as usize].var.level()
    }

    /// The `(var, lo, hi)` triple behind `r`, or `None` for a terminal.
    pub fn node(&self, r: BddRef) -> Option<(VarId, BddRef, BddRef)> {
        if r.is_terminal() {
            None
        } else {
            let n = self.nodes[r.0 as usize];
            Some((n.var, n.lo, n.hi))
        }
    }

    /// Total number of live nodes in the arena, terminals included.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn apply(&mut self, op: BinOp, a: BddRef, b: BddRef) -> BddRef {
        // Cheap identities, resolved without touching the cache.
        match op {
            BinOp::And => {
                if a == BddRef::FALSE || b == BddRef::FALSE {
                    return BddRef::FALSE;
                }
                if a == BddRef::TRUE {
                    return b;
                }
                if b == BddRef::TRUE || a == b {
                    return a;
                }
            }
            BinOp::Or => {
                if a == BddRef::TRUE || b == BddRef::TRUE {
                    return BddRef::TRUE;
                }
                if a == BddRef::FALSE {
                    return b;
                }
                if b == BddRef::FALSE || a == b {
                    return a;
                }
            }
            BinOp::Xor => {
                if a == b {
                    return BddRef::FALSE;
                }
                if a == BddRef::FALSE {
                    return b;
                }
                if b == BddRef::FALSE {
                    return a;
                }
            }
            BinOp::Implies => {
                if a == BddRef::FALSE || b == BddRef::TRUE || a == b {
                    return BddRef::TRUE;
                }
                if a == BddRef::TRUE {
                    return b;
                }
            }
        }
        if a.is_terminal() && b.is_terminal() {
            return self.constant(op.eval(a == BddRef::TRUE, b == BddRef::TRUE));
        }

        let (a, b) = if op.commutes() && a > b { (b, a) } else { (a, b) };
        let key = OpKey::Bin(op, a, b);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }

        let (la, lb) = (self.level(a), self.level(b));
        let split = la.min(lb);
        let (a0, a1) = self.branches_at(a, split);
        let (b0, b1) = self.branches_at(b, split);
        let lo = self.apply(op, a0, b0);
        let hi = self.apply(op, a1, b1);
        let r = self.mk_node(VarId(split), lo, hi);
        self.cache.insert(key, r);
        r
    }

    fn branches_at(&self, r: BddRef, split: u32) -> (BddRef, BddRef) {
        let n = self.nodes[r.0 as usize];
        if n.var.level() == split {
            (n.lo, n.hi)
        } else {
            (r, r)
        }
    }

    pub fn and(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BinOp::And, a, b)
    }

    pub fn or(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BinOp::Or, a, b)
    }

    pub fn xor(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BinOp::Xor, a, b)
    }

    pub fn implies(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BinOp::Implies, a, b)
    }

    pub fn negate(&mut self, a: BddRef) -> BddRef {
        self.apply(BinOp::Xor, a, BddRef::TRUE)
    }

    pub fn ite(&mut self, cond: BddRef, then: BddRef, els: BddRef) -> BddRef {
        let pos = self.and(cond, then);
        let not_cond = self.negate(cond);
        let neg = self.and(not_cond, els);
        self.or(pos, neg)
    }

    /// The cofactor of `a` with `var` fixed to `value`.
    pub fn restrict(&mut self, a: BddRef, var: VarId, value: bool) -> BddRef {
        let la = self.level(a);
        if la > var.level() {
            // Ordered: everything below the root tests later variables only.
            return a;
        }
        if la == var.level() {
            let n = self.nodes[a.0 as usize];
            return if value { n.hi } else { n.lo };
        }
        let key = OpKey::Restrict(a, var, value);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let n = self.nodes[a.0 as usize];
        let lo = self.restrict(n.lo, var, value);
        let hi = self.restrict(n.hi, var, value);
        let r = self.mk_node(n.var, lo, hi);
        self.cache.insert(key, r);
        r
    }

    /// Existential quantification over each variable in `vars` in turn:
    /// `∃v. f  =  f[v:=0] ∨ f[v:=1]`.
    pub fn exists(&mut self, a: BddRef, vars: &[VarId]) -> BddRef {
        let mut acc = a;
        for &v in vars {
            let zero = self.restrict(acc, v, false);
            let one = self.restrict(acc, v, true);
            acc = self.or(zero, one);
        }
        acc
    }

    /// Re-expresses `a` over the primed shadow variables. `a` must mention
    /// plain variables only; each level `2i` maps to `2i + 1`, which keeps
    /// the global order intact so the result is built by plain recursion.
    pub fn rename_to_primed(&mut self, a: BddRef) -> BddRef {
        if a.is_terminal() {
            return a;
        }
        let key = OpKey::Rename(a);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let n = self.nodes[a.0 as usize];
        assert!(
            !n.var.is_primed(),
            "rename_to_primed: operand already mentions primed variable at level {}",
            n.var.level()
        );
        let lo = self.rename_to_primed(n.lo);
        let hi = self.rename_to_primed(n.hi);
        let r = self.mk_node(n.var.to_primed(), lo, hi);
        self.cache.insert(key, r);
        r
    }

    /// The variables `a` actually tests, in order.
    pub fn support(&self, a: BddRef) -> Vec<VarId> {
        let mut seen = HashSet::new();
        let mut vars = BTreeSet::new();
        let mut stack = vec![a];
        while let Some(r) = stack.pop() {
            if r.is_terminal() || !seen.insert(r) {
                continue;
            }
            let n = self.nodes[r.0 as usize];
            vars.insert(n.var);
            stack.push(n.lo);
            stack.push(n.hi);
        }
        vars.into_iter().collect()
    }

    pub fn is_constant(&self, a: BddRef) -> Option<bool> {
        match a {
            BddRef::FALSE => Some(false),
            BddRef::TRUE => Some(true),
            _ => None,
        }
    }

    /// Evaluates `a` under a total assignment.
    pub fn eval(&self, a: BddRef, assignment: impl Fn(VarId) -> bool) -> bool {
        let mut r = a;
        while let Some((var, lo, hi)) = self.node(r) {
            r = if assignment(var) { hi } else { lo };
        }
        r == BddRef::TRUE
    }

    /// All root-to-1 paths as cubes, depth first with the 0-branch explored
    /// before the 1-branch, so the output order is deterministic.
    pub fn sat_cubes(&self, a: BddRef) -> Vec<Cube> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_cubes(a, &mut path, &mut out);
        out
    }

    fn collect_cubes(&self, r: BddRef, path: &mut Vec<(VarId, bool)>, out: &mut Vec<Cube>) {
        match self.node(r) {
            None => {
                if r == BddRef::TRUE {
                    out.push(Cube {
                        assignments: path.clone(),
                    });
                }
            }
            Some((var, lo, hi)) => {
                path.push((var, false));
                self.collect_cubes(lo, path, out);
                path.pop();
                path.push((var, true));
                self.collect_cubes(hi, path, out);
                path.pop();
            }
        }
    }

    /// Every decision node in the table, in creation order. Lets callers
    /// audit the whole arena (no redundant tests, no duplicate triples)
    /// instead of just the part reachable from one root.
    pub fn nodes(&self) -> impl Iterator<Item = (BddRef, VarId, BddRef, BddRef)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, n)| (BddRef(i as u32), n.var, n.lo, n.hi))
    }

    /// Number of internal (non-terminal) nodes reachable from `a`.
    pub fn reachable_count(&self, a: BddRef) -> usize {
        let mut seen = HashSet::new();
        let mut stack = vec![a];
        let mut count = 0;
        while let Some(r) = stack.pop() {
            if r.is_terminal() || !seen.insert(r) {
                continue;
            }
            count += 1;
            let n = self.nodes[r.0 as usize];
            stack.push(n.lo);
            stack.push(n.hi);
        }
        count
    }

    /// Graphviz rendering of the diagram rooted at `a`. Node ids follow a
    /// preorder walk (0-branch first), so the output is deterministic. Dashed
    /// edges are 0-branches, solid edges 1-branches.
    pub fn to_dot(&self, a: BddRef, name_of: impl Fn(VarId) -> String) -> String {
        let mut ids: HashMap<BddRef, usize> = HashMap::new();
        let mut order = Vec::new();
        self.number_preorder(a, &mut ids, &mut order);

        let mut dot = String::from("digraph bdd {\n");
        dot.push_str("  rankdir=TB;\n");
        let mut used_terminals = BTreeSet::new();
        for &r in &order {
            if let Some((var, _, _)) = self.node(r) {
                let _ = writeln!(
                    dot,
                    "  n{} [label=\"{}\", shape=circle];",
                    ids[&r],
                    name_of(var)
                );
            } else {
                used_terminals.insert(r);
            }
        }
        for r in used_terminals {
            let label = if r == BddRef::TRUE { "1" } else { "0" };
            let _ = writeln!(dot, "  n{} [label=\"{label}\", shape=box];", ids[&r]);
        }
        for &r in &order {
            if let Some((_, lo, hi)) = self.node(r) {
                let _ = writeln!(dot, "  n{} -> n{} [style=dashed];", ids[&r], ids[&lo]);
                let _ = writeln!(dot, "  n{} -> n{};", ids[&r], ids[&hi]);
            }
        }
        dot.push_str("}\n");
        dot
    }

    fn number_preorder(
        &self,
        r: BddRef,
        ids: &mut HashMap<BddRef, usize>,
        order: &mut Vec<BddRef>,
    ) {
        if ids.contains_key(&r) {
            return;
        }
        ids.insert(r, ids.len());
        order.push(r);
        if let Some((_, lo, hi)) = self.node(r) {
            self.number_preorder(lo, ids, order);
            self.number_preorder(hi, ids, order);
        }
    }
}
