//! Rewriting into the normal form consumed by the emptiness solver: tests
//! mention only states, `root`, and moded down tests (plus negations).
//!
//! Label and internal tests become one-letter-class down tests (the only
//! one-letter downward path from a node is the node itself). `eq` becomes a
//! moded any-letter test the same way, `leaf` becomes the absence of any
//! two-letter downward path, and mode-less down tests split into the two
//! moded variants. Positive splits multiply transitions; negative ones stay
//! conjunctive.

use std::collections::BTreeSet;

use super::{AutomatonError, BasicTest, Buda, DownMode, TestKind, Transition};
use crate::semigroup::nfa::LetterSet;
use crate::semigroup::{CompileOptions, TestId, TestSuite};

/// True when every test conjunct is admissible for the solver.
pub fn is_normalized(aut: &Buda) -> bool {
    aut.transitions().iter().all(|tr| {
        tr.test.iter().all(|t| {
            matches!(
                t.kind,
                TestKind::State(_) | TestKind::Root | TestKind::Down { mode: DownMode::Eq, .. }
                    | TestKind::Down { mode: DownMode::Neq, .. }
            )
        })
    })
}

struct Ctx {
    suite: TestSuite,
    n_labels: usize,
    n_internals: usize,
}

impl Ctx {
    fn alphabet_len(&self) -> usize {
        self.n_labels * self.n_internals
    }

    fn label_class(&mut self, a: u32) -> TestId {
        let n = self.alphabet_len();
        let set = LetterSet::from_iter(
            n,
            (0..self.n_internals).map(|b| a as usize * self.n_internals + b),
        );
        self.suite.add_letter_class(set, "")
    }

    fn internal_class(&mut self, bs: &BTreeSet<u32>) -> TestId {
        let n = self.alphabet_len();
        let n_int = self.n_internals;
        let set = LetterSet::from_iter(
            n,
            (0..self.n_labels).flat_map(|a| bs.iter().map(move |&b| a * n_int + b as usize)),
        );
        self.suite.add_letter_class(set, "")
    }

    fn any_letter(&mut self) -> TestId {
        let n = self.alphabet_len();
        self.suite.add_letter_class(LetterSet::full(n), "")
    }

    fn any_long(&mut self) -> TestId {
        self.suite.add_any_long("")
    }
}

fn down(test: TestId, mode: DownMode, positive: bool) -> BasicTest {
    BasicTest { positive, kind: TestKind::Down { test, mode } }
}

/// Rewrites one conjunct into a disjunction of conjunctions of admissible
/// conjuncts.
fn rewrite(t: &BasicTest, ctx: &mut Ctx) -> Vec<Vec<BasicTest>> {
    match (&t.kind, t.positive) {
        (TestKind::State(_), _) | (TestKind::Root, _) => vec![vec![t.clone()]],
        (TestKind::Down { mode: DownMode::Eq, .. }, _)
        | (TestKind::Down { mode: DownMode::Neq, .. }, _) => vec![vec![t.clone()]],
        (TestKind::Down { test, mode: DownMode::Any }, true) => {
            vec![vec![down(*test, DownMode::Eq, true)], vec![down(*test, DownMode::Neq, true)]]
        }
        (TestKind::Down { test, mode: DownMode::Any }, false) => {
            vec![vec![down(*test, DownMode::Eq, false), down(*test, DownMode::Neq, false)]]
        }
        (TestKind::Label(a), pos) => {
            let tid = ctx.label_class(*a);
            class_cases(tid, pos)
        }
        (TestKind::Internal(b), pos) => {
            let tid = ctx.internal_class(&[*b].into_iter().collect());
            class_cases(tid, pos)
        }
        (TestKind::InternalIn(bs), pos) => {
            let tid = ctx.internal_class(bs);
            class_cases(tid, pos)
        }
        (TestKind::EqData, true) => {
            let tid = ctx.any_letter();
            vec![vec![down(tid, DownMode::Eq, true)]]
        }
        (TestKind::EqData, false) => {
            let tid = ctx.any_letter();
            vec![vec![down(tid, DownMode::Neq, true)]]
        }
        (TestKind::Leaf, true) => {
            let tid = ctx.any_long();
            vec![vec![down(tid, DownMode::Eq, false), down(tid, DownMode::Neq, false)]]
        }
        (TestKind::Leaf, false) => {
            let tid = ctx.any_long();
            vec![vec![down(tid, DownMode::Eq, true)], vec![down(tid, DownMode::Neq, true)]]
        }
    }
}

/// A one-letter-class fact about the current node, as moded down tests.
fn class_cases(tid: TestId, positive: bool) -> Vec<Vec<BasicTest>> {
    if positive {
        vec![vec![down(tid, DownMode::Eq, true)], vec![down(tid, DownMode::Neq, true)]]
    } else {
        vec![vec![down(tid, DownMode::Eq, false), down(tid, DownMode::Neq, false)]]
    }
}

/// Drops transitions whose test set is trivially unsatisfiable: two positive
/// one-letter tests over disjoint classes, or a positive and negative moded
/// test on the same test id.
fn locally_satisfiable(aut_suite: &TestSuite, test: &[BasicTest]) -> bool {
    use crate::semigroup::TestKindSrc;
    let letter_class = |tid: TestId| -> Option<&LetterSet> {
        match &aut_suite.tests[tid as usize].kind {
            TestKindSrc::LetterClass(ls) => Some(ls),
            _ => None,
        }
    };
    for (i, a) in test.iter().enumerate() {
        for b in test.iter().skip(i + 1) {
            if let (
                TestKind::Down { test: t1, mode: m1 },
                TestKind::Down { test: t2, mode: m2 },
            ) = (&a.kind, &b.kind)
            {
                if t1 == t2 && m1 == m2 && a.positive != b.positive {
                    return false;
                }
                // Two positive one-letter-class facts with the same mode must
                // overlap: the witness path is the node itself in both.
                if a.positive && b.positive && m1 == m2 {
                    if let (Some(c1), Some(c2)) = (letter_class(*t1), letter_class(*t2)) {
                        if !c1.iter().any(|l| c2.contains(l)) {
                            return false;
                        }
                    }
                }
            }
        }
        if let TestKind::State(q1) = a.kind {
            for b in test.iter().skip(i + 1) {
                if let TestKind::State(q2) = b.kind {
                    if a.positive && b.positive && q1 != q2 {
                        return false;
                    }
                }
            }
        }
        if matches!(a.kind, TestKind::Root) {
            if let Some(b) = test.iter().find(|b| matches!(b.kind, TestKind::Root)) {
                if a.positive != b.positive {
                    return false;
                }
            }
        }
    }
    true
}

/// Produces an equivalent automaton in normal form.
pub fn normalize(aut: &Buda, opts: &CompileOptions) -> Result<Buda, AutomatonError> {
    let mut ctx = Ctx {
        suite: aut.suite().clone(),
        n_labels: aut.labels().len(),
        n_internals: aut.internals().len(),
    };
    let mut transitions: Vec<Transition> = Vec::new();
    for tr in aut.transitions() {
        // Expand the per-conjunct disjunctions.
        let mut conjs: Vec<Vec<BasicTest>> = vec![Vec::new()];
        for t in &tr.test {
            let cases = rewrite(t, &mut ctx);
            let mut next = Vec::new();
            for base in &conjs {
                for case in &cases {
                    let mut v = base.clone();
                    v.extend(case.iter().cloned());
                    next.push(v);
                }
            }
            conjs = next;
        }
        for test in conjs {
            if locally_satisfiable(&ctx.suite, &test) {
                transitions.push(Transition::new(test, tr.action.clone()));
            }
        }
    }
    transitions.sort();
    transitions.dedup();
    Buda::new(
        aut.labels().to_vec(),
        aut.internals().to_vec(),
        aut.states().to_vec(),
        aut.initial(),
        transitions,
        ctx.suite,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::membership::{membership, MemberOptions};
    use crate::automaton::text::parse_buda;
    use crate::tree::DataTree;

    #[test]
    fn label_test_becomes_two_moded_transitions() {
        let aut = parse_buda(
            "labels: a b\nstates: q0\ninitial: q0\ntrans:\nq0 & a -> accept\n",
            &CompileOptions::default(),
        )
        .unwrap();
        let n = normalize(&aut, &CompileOptions::default()).unwrap();
        assert!(is_normalized(&n));
        assert_eq!(n.transitions().len(), 2);
    }

    #[test]
    fn already_normal_is_stable() {
        let aut = parse_buda(
            "labels: a\nstates: q0\ninitial: q0\ntrans:\nq0 & root -> accept\n",
            &CompileOptions::default(),
        )
        .unwrap();
        let n = normalize(&aut, &CompileOptions::default()).unwrap();
        assert!(is_normalized(&n));
        assert_eq!(n.transitions(), aut.transitions());
    }

    #[test]
    fn membership_preserved_on_small_trees() {
        let aut = parse_buda(
            concat!(
                "labels: a b\nstates: q0 q1\ninitial: q0\ntrans:\n",
                "q0 & leaf & b -> keep(q1)\n",
                "q0 & leaf & a -> accept\n",
                "q0 & leaf & a & root -> accept\n",
                "q1 & eq -> keep(q1)\n",
                "q1 & eq & root -> accept\n",
                "q0 & root & leaf -> accept\n",
            ),
            &CompileOptions::default(),
        )
        .unwrap();
        let n = normalize(&aut, &CompileOptions::default()).unwrap();
        assert!(is_normalized(&n));
        for src in ["a#1", "b#2", "a#1(b#1)", "a#1(b#2)", "a#1(b#1,b#2)", "b#1(b#1(b#1))"] {
            let t = DataTree::parse(src).unwrap();
            let m0 = membership(&aut, &t, &MemberOptions::default()).unwrap().accepted;
            let m1 = membership(&n, &t, &MemberOptions::default()).unwrap().accepted;
            assert_eq!(m0, m1, "disagreement on {src}");
        }
    }
}
