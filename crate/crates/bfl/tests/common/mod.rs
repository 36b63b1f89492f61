//! Random fault trees and formulas for the oracle cross-check suites.
#![allow(dead_code)] // each test target uses its own subset

use bfl::{parse_fault_tree, CmpOp, FaultTree, Formula};
use proptest::prelude::*;

/// A random well-formed tree: up to 8 basic events, up to 6 gates, shared
/// children allowed (including duplicates inside one gate), VOT included.
/// Gate i always feeds gate i+1 so everything stays reachable from the top.
pub fn arb_tree() -> impl Strategy<Value = FaultTree> {
    (2usize..=8, 1usize..=6)
        .prop_flat_map(|(nb, ng)| {
            let gates = (0..ng)
                .map(|i| {
                    (0..3u8, prop::collection::vec(0..nb + i, 2..=4), any::<u64>())
                })
                .collect::<Vec<_>>();
            (Just(nb), gates)
        })
        .prop_map(|(nb, gates)| {
            let name = |idx: usize| {
                if idx < nb {
                    format!("e{}", idx + 1)
                } else {
                    format!("G{}", idx - nb + 1)
                }
            };
            let mut src = format!("toplevel G{};\n", gates.len());
            for (i, (kind, mut children, seed)) in gates.into_iter().enumerate() {
                if i > 0 && !children.contains(&(nb + i - 1)) {
                    children[0] = nb + i - 1;
                }
                let list =
                    children.iter().map(|&c| name(c)).collect::<Vec<_>>().join(", ");
                let def = match kind {
                    0 => format!("and({list})"),
                    1 => format!("or({list})"),
                    _ => format!("vot({}; {list})", seed as usize % children.len() + 1),
                };
                src.push_str(&format!("G{} = {def};\n", i + 1));
            }
            parse_fault_tree(&src).expect("generated source is well-formed")
        })
}

/// A random formula over the tree's elements, `depth` connectives deep.
/// `with_sets` adds the MCS/MPS constructors.
pub fn arb_formula(ft: &FaultTree, with_sets: bool) -> BoxedStrategy<Formula> {
    let elements: Vec<String> = ft.elements().map(|(n, _)| n.to_string()).collect();
    let bes: Vec<String> = ft.basic_event_order().to_vec();
    let atom = prop::sample::select(elements).prop_map(Formula::Atom);
    atom.prop_recursive(5, 32, 3, move |inner| {
        let pair = (inner.clone(), inner.clone());
        let evidence = (
            inner.clone(),
            prop::sample::subsequence(bes.clone(), 1..=bes.len().min(3)),
            prop::collection::vec(any::<bool>(), 3),
            prop::option::of(any::<bool>()),
        )
            .prop_map(|(base, targets, values, others)| Formula::Evidence {
                base: Box::new(base),
                subs: targets.into_iter().zip(values).collect(),
                others,
            });
        let vot = (prop::collection::vec(inner.clone(), 2..=3), any::<u64>(), 0..5u8)
            .prop_map(|(operands, k, c)| Formula::VotCmp {
                cmp: match c {
                    0 => CmpOp::Lt,
                    1 => CmpOp::Le,
                    2 => CmpOp::Eq,
                    3 => CmpOp::Ge,
                    _ => CmpOp::Gt,
                },
                k: k % (operands.len() as u64 + 1),
                operands,
            });
        let mut arms = vec![
            pair.clone().prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))).boxed(),
            pair.clone().prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))).boxed(),
            pair.clone()
                .prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b)))
                .boxed(),
            pair.clone().prop_map(|(a, b)| Formula::Iff(Box::new(a), Box::new(b))).boxed(),
            pair.prop_map(|(a, b)| Formula::Neq(Box::new(a), Box::new(b))).boxed(),
            inner.clone().prop_map(|a| Formula::Not(Box::new(a))).boxed(),
            evidence.boxed(),
            vot.boxed(),
        ];
        if with_sets {
            arms.push(inner.clone().prop_map(|a| Formula::Mcs(Box::new(a))).boxed());
            arms.push(inner.prop_map(|a| Formula::Mps(Box::new(a))).boxed());
        }
        prop::strategy::Union::new(arms)
    })
    .boxed()
}

/// A random tree-level formula: a quantifier over a vector formula, an
/// independence query, or a superfluousness query.
pub fn arb_verdict_formula(ft: &FaultTree) -> BoxedStrategy<Formula> {
    let inner = arb_formula(ft, true);
    let bes: Vec<String> = ft.basic_event_order().to_vec();
    prop_oneof![
        inner.clone().prop_map(|f| Formula::Exists(Box::new(f))),
        inner.clone().prop_map(|f| Formula::Forall(Box::new(f))),
        (inner.clone(), inner).prop_map(|(a, b)| Formula::Idp(Box::new(a), Box::new(b))),
        prop::sample::select(bes).prop_map(Formula::Sup),
    ]
    .boxed()
}

pub fn tree_and_formula(with_sets: bool) -> impl Strategy<Value = (FaultTree, Formula)> {
    arb_tree().prop_flat_map(move |ft| {
        let formula = arb_formula(&ft, with_sets);
        (Just(ft), formula)
    })
}

pub fn tree_and_verdict() -> impl Strategy<Value = (FaultTree, Formula)> {
    arb_tree().prop_flat_map(|ft| {
        let formula = arb_verdict_formula(&ft);
        (Just(ft), formula)
    })
}
