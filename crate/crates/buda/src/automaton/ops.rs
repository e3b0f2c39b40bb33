//! Union and intersection of automata over a common label alphabet.
//!
//! Union sums the internal alphabets and adds a fresh initial state firing
//! either side's initial transitions. Per-leaf side choices are synchronized
//! through the labeling: each leaf firing launches a guard thread that checks
//! its side's internal letters on the whole path to the root, so a run mixes
//! sides only on trees it would reject anyway.
//!
//! Intersection pairs the internal alphabets and runs both automata from a
//! fresh initial stay state that forks into the two originals; the stay
//! elimination then compiles the fork away.
use std::collections::BTreeSet;


use super::epsilon::eliminate_epsilon;
use super::{
    AutomatonError, BasicAction, BasicTest, Buda, BudaEps, StateId, TestKind, Transition,
};
use crate::semigroup::nfa::LetterSet;
use crate::semigroup::{CompileOptions, TestKindSrc, TestSuite};

fn check_labels(a1: &Buda, a2: &Buda) -> Result<(), AutomatonError> {
    if a1.labels() != a2.labels() {
        return Err(AutomatonError::Text(format!(
            "label alphabets differ: {:?} vs {:?}",
            a1.labels(),
            a2.labels()
        )));
    }
    Ok(())
}

/// Re-index one side's letters into a combined alphabet.
/// `map(label, old_internal)` lists the new letter ids standing for the pair.
fn remap_suite(
    suite: &TestSuite,
    n_labels: usize,
    old_internals: usize,
    new_alphabet_len: usize,
    map: &dyn Fn(usize, usize) -> Vec<usize>,
) -> TestSuite {
    let mut s = suite.clone();
    let expansion: Vec<Vec<usize>> = (0..n_labels * old_internals)
        .map(|id| map(id / old_internals, id % old_internals))
        .collect();
    s.lift_alphabet(&expansion, new_alphabet_len);
    s
}

fn shift_tests(tr: &Transition, internal_map: &dyn Fn(u32) -> BTreeSet<u32>, test_off: u32, state_off: u32) -> Transition {
    let test = tr
        .test
        .iter()
        .map(|t| {
            let kind = match &t.kind {
                TestKind::State(q) => TestKind::State(q + state_off),
                TestKind::Internal(b) => TestKind::InternalIn(internal_map(*b)),
                TestKind::InternalIn(s) => {
                    TestKind::InternalIn(s.iter().flat_map(|b| internal_map(*b)).collect())
                }
                TestKind::Down { test, mode } => TestKind::Down { test: test + test_off, mode: *mode },
                k => k.clone(),
            };
            BasicTest { positive: t.positive, kind }
        })
        .collect();
    let action = tr
        .action
        .iter()
        .map(|a| match a.target() {
            Some(p) => a.with_target(p + state_off),
            None => *a,
        })
        .collect();
    Transition::new(test, action)
}

/// Language union.
pub fn union(a1: &Buda, a2: &Buda, opts: &CompileOptions) -> Result<Buda, AutomatonError> {
    check_labels(a1, a2)?;
    let labels = a1.labels().to_vec();
    let n_labels = labels.len();
    let n1 = a1.internals().len();
    let n2 = a2.internals().len();
    let internals: Vec<String> = a1
        .internals()
        .iter()
        .map(|b| format!("L{b}"))
        .chain(a2.internals().iter().map(|b| format!("R{b}")))
        .collect();
    let n_int = internals.len();
    let alen = n_labels * n_int;

    // Side letter sets in the summed alphabet.
    let side1: LetterSet =
        LetterSet::from_iter(alen, (0..n_labels).flat_map(|a| (0..n1).map(move |b| a * n_int + b)));
    let side2: LetterSet = LetterSet::from_iter(
        alen,
        (0..n_labels).flat_map(|a| (n1..n_int).map(move |b| a * n_int + b)),
    );

    let suite1 = remap_suite(a1.suite(), n_labels, n1, alen, &|a, b| vec![a * n_int + b]);
    let suite2 = remap_suite(a2.suite(), n_labels, n2, alen, &|a, b| vec![a * n_int + n1 + b]);
    let mut suite = TestSuite::default();
    let mut test_off1 = 0u32;
    let space_off1 = suite.spaces.len();
    suite.spaces.extend(suite1.spaces.iter().cloned());
    for t in &suite1.tests {
        let kind = match &t.kind {
            TestKindSrc::Machine { space, starts, accepts } => TestKindSrc::Machine {
                space: space + space_off1,
                starts: starts.clone(),
                accepts: accepts.clone(),
            },
            k => k.clone(),
        };
        suite.tests.push(crate::semigroup::TestSrc { kind, desc: t.desc.clone() });
    }
    let _ = &mut test_off1;
    let test_off2 = suite.tests.len() as u32;
    let space_off2 = suite.spaces.len();
    suite.spaces.extend(suite2.spaces.iter().cloned());
    for t in &suite2.tests {
        let kind = match &t.kind {
            TestKindSrc::Machine { space, starts, accepts } => TestKindSrc::Machine {
                space: space + space_off2,
                starts: starts.clone(),
                accepts: accepts.clone(),
            },
            k => k.clone(),
        };
        suite.tests.push(crate::semigroup::TestSrc { kind, desc: t.desc.clone() });
    }

    // States: sides, fresh initial, per-side path guards.
    let mut states: Vec<String> = a1.states().iter().map(|s| format!("L{s}")).collect();
    states.extend(a2.states().iter().map(|s| format!("R{s}")));
    let off2 = a1.states().len() as StateId;
    let q0 = states.len() as StateId;
    states.push("u0".into());
    let guard1 = states.len() as StateId;
    states.push("gd1".into());
    let guard2 = states.len() as StateId;
    states.push("gd2".into());

    let int_map1 = |b: u32| -> BTreeSet<u32> { [b].into_iter().collect() };
    let int_map2 = |b: u32| -> BTreeSet<u32> { [b + n1 as u32].into_iter().collect() };

    let mut transitions: Vec<Transition> = Vec::new();
    for tr in a1.transitions() {
        transitions.push(shift_tests(tr, &int_map1, 0, 0));
    }
    for tr in a2.transitions() {
        transitions.push(shift_tests(tr, &int_map2, test_off2, off2));
    }

    // Side guards: check every internal letter on the path to the root.
    let t_side1 = suite.add_letter_class(side1, "side1");
    let t_side2 = suite.add_letter_class(side2, "side2");
    for (guard, side_test) in [(guard1, t_side1), (guard2, t_side2)] {
        let own = BasicTest::pos(TestKind::Down { test: side_test, mode: super::DownMode::Any });
        transitions.push(Transition::new(
            vec![BasicTest::pos(TestKind::State(guard)), BasicTest::neg(TestKind::Root), own.clone()],
            vec![BasicAction::Keep(guard)],
        ));
        transitions.push(Transition::new(
            vec![BasicTest::pos(TestKind::State(guard)), BasicTest::pos(TestKind::Root), own],
            vec![BasicAction::Accept],
        ));
    }

    // Fresh initial state: fire either side's initial transitions, plus the
    // matching guard.
    for (src, init, map, toff, soff, guard) in [
        (a1, a1.initial(), &int_map1 as &dyn Fn(u32) -> BTreeSet<u32>, 0u32, 0 as StateId, guard1),
        (a2, a2.initial(), &int_map2 as &dyn Fn(u32) -> BTreeSet<u32>, test_off2, off2, guard2),
    ] {
        for tr in src.transitions() {
            let applies = match tr.state_test() {
                Some(q) => q == init,
                None => {
                    // No positive state conjunct: applies unless negated away.
                    !tr.test.iter().any(|t| {
                        !t.positive && matches!(t.kind, TestKind::State(q) if q == init)
                    })
                }
            };
            if !applies {
                continue;
            }
            let shifted = shift_tests(tr, map, toff, soff);
            let mut test: Vec<BasicTest> = shifted
                .test
                .iter()
                .filter(|t| !matches!(t.kind, TestKind::State(_)))
                .cloned()
                .collect();
            test.push(BasicTest::pos(TestKind::State(q0)));
            let mut action = shifted.action.clone();
            let is_root_discharge =
                action.iter().all(|a| matches!(a, BasicAction::Accept));
            if !is_root_discharge {
                action.push(BasicAction::Keep(guard));
                transitions.push(Transition::new(test, action));
            } else {
                // Keep root discharges guard-free, but also provide a guarded
                // variant for leaves that are not the root.
                let mut guarded = test.clone();
                guarded.push(BasicTest::neg(TestKind::Root));
                let mut ga = action.clone();
                ga.push(BasicAction::Keep(guard));
                transitions.push(Transition::new(guarded, ga));
                let mut root_test = test.clone();
                root_test.push(BasicTest::pos(TestKind::Root));
                transitions.push(Transition::new(root_test, action));
            }
        }
    }

    Buda::new(labels, internals, states, q0, transitions, suite, opts)
}

/// Language intersection, built through the stay-action model: a fresh stay
/// initial forks into both sides over the paired internal alphabet.
pub fn intersect(a1: &Buda, a2: &Buda, opts: &CompileOptions) -> Result<Buda, AutomatonError> {
    check_labels(a1, a2)?;
    let labels = a1.labels().to_vec();
    let n_labels = labels.len();
    let n1 = a1.internals().len();
    let n2 = a2.internals().len();
    let mut internals = Vec::with_capacity(n1 * n2);
    for b1 in a1.internals() {
        for b2 in a2.internals() {
            internals.push(format!("{b1}x{b2}"));
        }
    }
    let n_int = internals.len();
    let alen = n_labels * n_int;

    // Letter (a, b1) on side 1 stands for every (a, (b1, *)).
    let suite1 = remap_suite(a1.suite(), n_labels, n1, alen, &|a, b1| {
        (0..n2).map(|b2| a * n_int + b1 * n2 + b2).collect()
    });
    let suite2 = remap_suite(a2.suite(), n_labels, n2, alen, &|a, b2| {
        (0..n1).map(|b1| a * n_int + b1 * n2 + b2).collect()
    });
    let mut suite = TestSuite::default();
    let space_off1 = 0;
    suite.spaces.extend(suite1.spaces.iter().cloned());
    for t in &suite1.tests {
        let kind = match &t.kind {
            TestKindSrc::Machine { space, starts, accepts } => TestKindSrc::Machine {
                space: space + space_off1,
                starts: starts.clone(),
                accepts: accepts.clone(),
            },
            k => k.clone(),
        };
        suite.tests.push(crate::semigroup::TestSrc { kind, desc: t.desc.clone() });
    }
    let test_off2 = suite.tests.len() as u32;
    let space_off2 = suite.spaces.len();
    suite.spaces.extend(suite2.spaces.iter().cloned());
    for t in &suite2.tests {
        let kind = match &t.kind {
            TestKindSrc::Machine { space, starts, accepts } => TestKindSrc::Machine {
                space: space + space_off2,
                starts: starts.clone(),
                accepts: accepts.clone(),
            },
            k => k.clone(),
        };
        suite.tests.push(crate::semigroup::TestSrc { kind, desc: t.desc.clone() });
    }

    let mut states: Vec<String> = a1.states().iter().map(|s| format!("L{s}")).collect();
    states.extend(a2.states().iter().map(|s| format!("R{s}")));
    let off2 = a1.states().len() as StateId;
    let q0 = states.len() as StateId;
    states.push("i0".into());
    // Stay copies of the two initial states; the fresh initial forks into
    // them, so nothing else ever targets them.
    let e1 = states.len() as StateId;
    states.push("i0L".into());
    let e2 = states.len() as StateId;
    states.push("i0R".into());

    let int_map1 = |b1: u32| -> BTreeSet<u32> { (0..n2 as u32).map(|b2| b1 * n2 as u32 + b2).collect() };
    let int_map2 = |b2: u32| -> BTreeSet<u32> { (0..n1 as u32).map(|b1| b1 * n2 as u32 + b2).collect() };

    let mut transitions: Vec<Transition> = Vec::new();
    for tr in a1.transitions() {
        transitions.push(shift_tests(tr, &int_map1, 0, 0));
    }
    for tr in a2.transitions() {
        transitions.push(shift_tests(tr, &int_map2, test_off2, off2));
    }
    transitions.push(Transition::new(
        vec![BasicTest::pos(TestKind::State(q0))],
        vec![BasicAction::Keep(e1), BasicAction::Keep(e2)],
    ));
    for (src, init, map, toff, soff, copy) in [
        (a1, a1.initial(), &int_map1 as &dyn Fn(u32) -> BTreeSet<u32>, 0u32, 0 as StateId, e1),
        (a2, a2.initial(), &int_map2 as &dyn Fn(u32) -> BTreeSet<u32>, test_off2, off2, e2),
    ] {
        for tr in src.transitions() {
            let applies = match tr.state_test() {
                Some(q) => q == init,
                None => !tr
                    .test
                    .iter()
                    .any(|t| !t.positive && matches!(t.kind, TestKind::State(q) if q == init)),
            };
            if !applies {
                continue;
            }
            let shifted = shift_tests(tr, map, toff, soff);
            let mut test: Vec<BasicTest> = shifted
                .test
                .iter()
                .filter(|t| !matches!(t.kind, TestKind::State(_)))
                .cloned()
                .collect();
            test.push(BasicTest::pos(TestKind::State(copy)));
            transitions.push(Transition::new(test, shifted.action.clone()));
        }
    }

    let n_states = states.len();
    let mut eps = vec![false; n_states];
    let mut rank = vec![0u32; n_states];
    eps[e1 as usize] = true;
    eps[e2 as usize] = true;
    rank[e1 as usize] = 1;
    rank[e2 as usize] = 1;
    let aut = Buda::new(labels, internals, states, q0, transitions, suite, opts)?;
    let be = BudaEps::new(aut, eps, rank)?;
    Ok(eliminate_epsilon(&be, opts)?.aut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::membership::{membership, MemberOptions};
    use crate::automaton::text::parse_buda;
    use crate::oracle;

    fn aut_all() -> Buda {
        parse_buda(
            "labels: a b\nstates: q0\ninitial: q0\ntrans:\nq0 -> keep(q0)\nq0 -> accept\n",
            &CompileOptions::default(),
        )
        .unwrap()
    }

    fn aut_root_a() -> Buda {
        parse_buda(
            concat!(
                "labels: a b\nstates: q0 m\ninitial: q0\ntrans:\n",
                "q0 -> keep(m)\n",
                "q0 & root & a -> accept\n",
                "m -> keep(m)\n",
                "m & root & a -> accept\n",
            ),
            &CompileOptions::default(),
        )
        .unwrap()
    }

    fn aut_some_leaf_eq_root() -> Buda {
        // Some leaf stores its datum; the thread reaches the root and tests eq.
        parse_buda(
            concat!(
                "labels: a b\nstates: q0 c m\ninitial: q0\ntrans:\n",
                "q0 -> store(c)\n",
                "q0 -> keep(m)\n",
                "q0 & root -> accept\n",
                "c & !root -> keep(c)\n",
                "c & root & eq -> accept\n",
                "c & eq & root -> accept\n",
                "m -> keep(m)\n",
                "m -> accept\n",
                "m & root -> accept\n",
            ),
            &CompileOptions::default(),
        )
        .unwrap()
    }

    fn agree(op_result: &Buda, f: impl Fn(&crate::tree::DataTree) -> bool, max_nodes: usize) {
        for t in oracle::enumerate_trees(max_nodes, &["a", "b"], 2) {
            let got = membership(op_result, &t, &MemberOptions::default()).unwrap().accepted;
            assert_eq!(got, f(&t), "disagreement on {t}");
        }
    }

    #[test]
    fn intersect_with_all_is_identity() {
        let all = aut_all();
        let a = aut_root_a();
        let inter = intersect(&all, &a, &CompileOptions::default()).unwrap();
        agree(
            &inter,
            |t| membership(&a, t, &MemberOptions::default()).unwrap().accepted,
            3,
        );
    }

    #[test]
    fn union_with_self_is_idempotent() {
        let a = aut_root_a();
        let u = union(&a, &a, &CompileOptions::default()).unwrap();
        agree(
            &u,
            |t| membership(&a, t, &MemberOptions::default()).unwrap().accepted,
            3,
        );
    }

    #[test]
    fn union_is_disjunction() {
        let a = aut_root_a();
        let b = aut_some_leaf_eq_root();
        let u = union(&a, &b, &CompileOptions::default()).unwrap();
        agree(
            &u,
            |t| {
                membership(&a, t, &MemberOptions::default()).unwrap().accepted
                    || membership(&b, t, &MemberOptions::default()).unwrap().accepted
            },
            3,
        );
    }

    #[test]
    fn intersection_is_conjunction() {
        let a = aut_root_a();
        let b = aut_some_leaf_eq_root();
        let i = intersect(&a, &b, &CompileOptions::default()).unwrap();
        agree(
            &i,
            |t| {
                membership(&a, t, &MemberOptions::default()).unwrap().accepted
                    && membership(&b, t, &MemberOptions::default()).unwrap().accepted
            },
            3,
        );
    }

    #[test]
    fn alphabet_mismatch_is_an_error() {
        let a = aut_all();
        let c = parse_buda(
            "labels: c\nstates: q0\ninitial: q0\ntrans:\nq0 -> accept\n",
            &CompileOptions::default(),
        )
        .unwrap();
        assert!(union(&a, &c, &CompileOptions::default()).is_err());
    }
}
