//! Cross-checks of the diagram-based engine against independent evaluation:
//! the exhaustive truth-table oracle, a test-local evaluator for the sugared
//! syntax, and brute-force set arithmetic over all status vectors.

mod common;

use bfl::{
    desugar, oracle_evaluate, parse_formula, Analyzer, BddRef, CexOutcome, CmpOp, CompileResult,
    Compiler, FaultTree, Formula, OracleResult, ResultSet, ScopeMode, StatusVector, Verdict,
};
use common::{arb_tree, tree_and_formula, tree_and_verdict};
use proptest::prelude::*;

fn mode_of(global: bool) -> ScopeMode {
    if global {
        ScopeMode::Global
    } else {
        ScopeMode::Support
    }
}

/// Sugared-syntax evaluator, written against the connective truth tables
/// rather than the desugaring rules. `None` for set/verdict operators.
fn eval_sugared(f: &Formula, ft: &FaultTree, b: &StatusVector) -> Option<bool> {
    match f {
        Formula::Atom(name) => Some(ft.eval_structure(b, name).unwrap()),
        Formula::Not(a) => eval_sugared(a, ft, b).map(|v| !v),
        Formula::And(x, y) => Some(eval_sugared(x, ft, b)? && eval_sugared(y, ft, b)?),
        Formula::Or(x, y) => Some(eval_sugared(x, ft, b)? || eval_sugared(y, ft, b)?),
        Formula::Implies(x, y) => Some(!eval_sugared(x, ft, b)? || eval_sugared(y, ft, b)?),
        Formula::Iff(x, y) => Some(eval_sugared(x, ft, b)? == eval_sugared(y, ft, b)?),
        Formula::Neq(x, y) => Some(eval_sugared(x, ft, b)? != eval_sugared(y, ft, b)?),
        Formula::Evidence { base, subs, others } => {
            let mut pinned = match others {
                Some(c) => StatusVector::new(vec![*c; b.len()]),
                None => b.clone(),
            };
            for (name, value) in subs {
                pinned.set_bit(ft.basic_event_index(name).unwrap(), *value);
            }
            eval_sugared(base, ft, &pinned)
        }
        Formula::VotCmp { cmp, k, operands } => {
            let mut count = 0u64;
            for op in operands {
                count += eval_sugared(op, ft, b)? as u64;
            }
            Some(match cmp {
                CmpOp::Lt => count < *k,
                CmpOp::Le => count <= *k,
                CmpOp::Eq => count == *k,
                CmpOp::Ge => count >= *k,
                CmpOp::Gt => count > *k,
            })
        }
        Formula::Mcs(_)
        | Formula::Mps(_)
        | Formula::Exists(_)
        | Formula::Forall(_)
        | Formula::Idp(_, _)
        | Formula::Sup(_) => None,
    }
}

fn all_vectors(ft: &FaultTree) -> impl Iterator<Item = StatusVector> + '_ {
    let n = ft.num_basic_events();
    (0..1usize << n).map(move |idx| StatusVector::from_index(idx, n))
}

/// Does `b` fall on one of the result set's cubes?
fn matches_cube(ft: &FaultTree, set: &ResultSet, b: &StatusVector) -> usize {
    set.cubes
        .iter()
        .filter(|cube| {
            cube.failed.iter().all(|n| b.bit(ft.basic_event_index(n).unwrap()))
                && cube.operational.iter().all(|n| !b.bit(ft.basic_event_index(n).unwrap()))
        })
        .count()
}

proptest! {
    #[test]
    fn evaluate_matches_the_exhaustive_oracle(
        (ft, f) in tree_and_formula(true),
        global in any::<bool>(),
    ) {
        let mode = mode_of(global);
        let core = desugar(&f, &ft);
        let OracleResult::Vector(table) = oracle_evaluate(&ft, &core, mode).unwrap() else {
            unreachable!("vector formula")
        };
        let mut analyzer = Analyzer::new(&ft, mode);
        for (idx, b) in all_vectors(&ft).enumerate() {
            let got = analyzer.evaluate(&f, Some(&b)).unwrap();
            prop_assert_eq!(got, Verdict::Vector(table[idx]), "vector {:?}", b);
        }
    }

    #[test]
    fn verdicts_match_the_exhaustive_oracle((ft, f) in tree_and_verdict(), global in any::<bool>()) {
        let mode = mode_of(global);
        let core = desugar(&f, &ft);
        let OracleResult::Tree(expected) = oracle_evaluate(&ft, &core, mode).unwrap() else {
            unreachable!("verdict formula")
        };
        let mut analyzer = Analyzer::new(&ft, mode);
        prop_assert_eq!(analyzer.evaluate(&f, None).unwrap(), Verdict::Tree(expected));
    }

    #[test]
    fn direct_substitution_agrees_with_compilation((ft, f) in tree_and_formula(false)) {
        let mut analyzer = Analyzer::new(&ft, ScopeMode::Support);
        let core = desugar(&f, &ft);
        for b in all_vectors(&ft) {
            let direct = analyzer
                .evaluate_direct(&core, &b)
                .unwrap()
                .expect("set-free formulas evaluate directly");
            prop_assert_eq!(
                analyzer.evaluate_compiled(&f, Some(&b)).unwrap(),
                Verdict::Vector(direct)
            );
        }
    }

    #[test]
    fn desugaring_preserves_connective_truth_tables((ft, f) in tree_and_formula(false)) {
        let mut analyzer = Analyzer::new(&ft, ScopeMode::Support);
        for b in all_vectors(&ft) {
            let expected = eval_sugared(&f, &ft, &b).expect("set-free");
            prop_assert_eq!(
                analyzer.evaluate(&f, Some(&b)).unwrap(),
                Verdict::Vector(expected)
            );
        }
    }

    #[test]
    fn evidence_rewrites_the_vector(
        (ft, f) in tree_and_formula(true),
        pick in any::<prop::sample::Index>(),
        value in any::<bool>(),
    ) {
        let target = pick.get(ft.basic_event_order()).clone();
        let index = ft.basic_event_index(&target).unwrap();
        let pinned = Formula::Evidence {
            base: Box::new(f.clone()),
            subs: vec![(target, value)],
            others: None,
        };
        let mut analyzer = Analyzer::new(&ft, ScopeMode::Support);
        for b in all_vectors(&ft) {
            let mut rewritten = b.clone();
            rewritten.set_bit(index, value);
            prop_assert_eq!(
                analyzer.evaluate(&pinned, Some(&b)).unwrap(),
                analyzer.evaluate(&f, Some(&rewritten)).unwrap()
            );
        }
    }

    #[test]
    fn evidence_on_distinct_events_commutes(
        (ft, f) in tree_and_formula(true),
        pick1 in any::<prop::sample::Index>(),
        pick2 in any::<prop::sample::Index>(),
        v1 in any::<bool>(),
        v2 in any::<bool>(),
    ) {
        let e1 = pick1.get(ft.basic_event_order()).clone();
        let e2 = pick2.get(ft.basic_event_order()).clone();
        prop_assume!(e1 != e2);
        let wrap = |outer: (String, bool), inner: (String, bool)| Formula::Evidence {
            base: Box::new(Formula::Evidence {
                base: Box::new(f.clone()),
                subs: vec![inner],
                others: None,
            }),
            subs: vec![outer],
            others: None,
        };
        let ab = wrap((e2.clone(), v2), (e1.clone(), v1));
        let ba = wrap((e1, v1), (e2, v2));
        let mut compiler = Compiler::new(&ft);
        let CompileResult::Vector(x) =
            compiler.compile_formula(&desugar(&ab, &ft), ScopeMode::Support).unwrap()
        else { unreachable!() };
        let CompileResult::Vector(y) =
            compiler.compile_formula(&desugar(&ba, &ft), ScopeMode::Support).unwrap()
        else { unreachable!() };
        prop_assert_eq!(x, y, "same function must be the same node");
    }

    #[test]
    fn structure_function_is_monotone(ft in arb_tree(), low in any::<usize>(), extra in any::<usize>()) {
        let n = ft.num_basic_events();
        let mask = (1usize << n) - 1;
        let small = StatusVector::from_index(low & mask, n);
        let large = StatusVector::from_index((low | extra) & mask, n);
        for (name, _) in ft.elements() {
            prop_assert!(
                ft.eval_structure(&small, name).unwrap() <= ft.eval_structure(&large, name).unwrap(),
                "{name} dropped on a larger failure set"
            );
        }
    }

    #[test]
    fn minimal_cut_vectors_are_a_complete_antichain((ft, f) in tree_and_formula(false)) {
        let n = ft.num_basic_events();
        let mut analyzer = Analyzer::new(&ft, ScopeMode::Support);
        let minimized = Formula::Mcs(Box::new(f.clone()));
        let sat: Vec<usize> = all_vectors(&ft)
            .enumerate()
            .filter(|(_, b)| analyzer.evaluate(&f, Some(b)).unwrap() == Verdict::Vector(true))
            .map(|(idx, _)| idx)
            .collect();
        let minimal: Vec<usize> = all_vectors(&ft)
            .enumerate()
            .filter(|(_, b)| analyzer.evaluate(&minimized, Some(b)).unwrap() == Verdict::Vector(true))
            .map(|(idx, _)| idx)
            .collect();
        let scope_mask = analyzer
            .satisfying_set(&minimized)
            .unwrap()
            .scope
            .iter()
            .map(|name| 1usize << ft.basic_event_index(name).unwrap())
            .sum::<usize>();
        for &v in &minimal {
            prop_assert!(sat.contains(&v), "cut vectors satisfy the operand");
        }
        for &u in &minimal {
            for &v in &minimal {
                let (us, vs) = (u & scope_mask, v & scope_mask);
                prop_assert!(
                    !(us & !vs == 0 && us != vs),
                    "{u:0n$b} is strictly below {v:0n$b} on the scope"
                );
            }
        }
        // Every satisfying vector sits above some minimal one that agrees
        // with it outside the scope.
        for &v in &sat {
            prop_assert!(
                minimal.iter().any(|&u| {
                    u & !scope_mask == v & !scope_mask && u & scope_mask & !(v & scope_mask) == 0
                }),
                "{v:0n$b} dominates no minimal cut vector"
            );
        }
    }

    #[test]
    fn enumeration_matches_pointwise_evaluation((ft, f) in tree_and_formula(true)) {
        let mut analyzer = Analyzer::new(&ft, ScopeMode::Support);
        let set = analyzer.satisfying_set(&f).unwrap();
        for b in all_vectors(&ft) {
            let holds = analyzer.evaluate(&f, Some(&b)).unwrap() == Verdict::Vector(true);
            let hits = matches_cube(&ft, &set, &b);
            prop_assert!(hits <= 1, "cubes overlap on {:?}", b);
            prop_assert_eq!(holds, hits == 1, "listing disagrees on {:?}", b);
        }
    }

    #[test]
    fn counterexamples_satisfy_their_contract(
        (ft, f) in tree_and_formula(true),
        seed in any::<usize>(),
    ) {
        let n = ft.num_basic_events();
        let b = StatusVector::from_index(seed & ((1 << n) - 1), n);
        let mut analyzer = Analyzer::new(&ft, ScopeMode::Support);
        let holds = analyzer.evaluate(&f, Some(&b)).unwrap() == Verdict::Vector(true);
        let satisfiable = !analyzer.satisfying_set(&f).unwrap().cubes.is_empty();
        match analyzer.counterexample(&f, &b).unwrap() {
            CexOutcome::AlreadySatisfies => prop_assert!(holds),
            CexOutcome::Unsatisfiable => prop_assert!(!satisfiable),
            CexOutcome::Found(cex) => {
                prop_assert!(!holds);
                prop_assert!(satisfiable);
                prop_assert_eq!(
                    analyzer.evaluate(&f, Some(&cex.revised)).unwrap(),
                    Verdict::Vector(true),
                    "revision must satisfy the formula"
                );
                let differing: Vec<String> = ft
                    .basic_event_order()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| b.bit(*i) != cex.revised.bit(*i))
                    .map(|(_, name)| name.clone())
                    .collect();
                prop_assert_eq!(&differing, &cex.flipped, "flip list must match the diff");
                for name in &cex.flipped {
                    let i = ft.basic_event_index(name).unwrap();
                    let mut reverted = cex.revised.clone();
                    reverted.set_bit(i, b.bit(i));
                    prop_assert_eq!(
                        analyzer.evaluate(&f, Some(&reverted)).unwrap(),
                        Verdict::Vector(false),
                        "flipping {} was not necessary",
                        name
                    );
                }
            }
        }
    }

    #[test]
    fn compiled_diagrams_mention_only_plain_variables(
        (ft, f) in tree_and_formula(true),
        global in any::<bool>(),
    ) {
        let core = desugar(&f, &ft);
        let mut compiler = Compiler::new(&ft);
        let CompileResult::Vector(r) = compiler.compile_formula(&core, mode_of(global)).unwrap()
        else { unreachable!() };
        for var in compiler.manager().support(r) {
            prop_assert!(!var.is_primed(), "{var:?} leaked out of a minimization");
            prop_assert!(var.base_index() < ft.num_basic_events());
        }
    }

    #[test]
    fn printing_and_reparsing_preserves_the_function((ft, f) in tree_and_formula(true)) {
        let printed = f.to_string();
        let reparsed = parse_formula(&printed, &ft)
            .unwrap_or_else(|e| panic!("reparse of `{printed}`: {e}"));
        let mut compiler = Compiler::new(&ft);
        let CompileResult::Vector(x) =
            compiler.compile_formula(&desugar(&f, &ft), ScopeMode::Support).unwrap()
        else { unreachable!() };
        let CompileResult::Vector(y) =
            compiler.compile_formula(&desugar(&reparsed, &ft), ScopeMode::Support).unwrap()
        else { unreachable!() };
        prop_assert_eq!(x, y, "`{}` changed meaning after printing", printed);
    }

    #[test]
    fn tautologies_and_contradictions_hit_the_terminals((ft, f) in tree_and_formula(true)) {
        let mut compiler = Compiler::new(&ft);
        let excluded_middle =
            Formula::Or(Box::new(f.clone()), Box::new(Formula::Not(Box::new(f.clone()))));
        let contradiction =
            Formula::And(Box::new(f.clone()), Box::new(Formula::Not(Box::new(f))));
        let CompileResult::Vector(t) =
            compiler.compile_formula(&desugar(&excluded_middle, &ft), ScopeMode::Support).unwrap()
        else { unreachable!() };
        let CompileResult::Vector(b) =
            compiler.compile_formula(&desugar(&contradiction, &ft), ScopeMode::Support).unwrap()
        else { unreachable!() };
        prop_assert_eq!(t, BddRef::TRUE);
        prop_assert_eq!(b, BddRef::FALSE);
    }
}
