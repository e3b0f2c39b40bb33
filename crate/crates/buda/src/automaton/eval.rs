//! Direct evaluation of test conjunctions on concrete labeled data trees.

use super::{Buda, DownMode, StateId, TestKind};
use crate::semigroup::ElemId;
use crate::tree::{DataTree, DataValue, Position};

/// Letter index of a tree node in the automaton's product alphabet.
/// The tree must carry internal labels and use the automaton's alphabets.
pub fn node_letter(aut: &Buda, tree: &DataTree, pos: &Position) -> u32 {
    let n = tree.node(pos).expect("position in tree");
    let l = aut.label_index(&n.label).expect("tree label in automaton alphabet");
    let b = aut
        .internal_index(n.internal.as_deref().expect("tree carries internal labels"))
        .expect("internal label in automaton alphabet");
    aut.letter_id(l, b)
}

/// Whether the thread `(state, datum)` at `pos` makes the conjunction true.
pub fn eval_test(
    aut: &Buda,
    tree: &DataTree,
    pos: &Position,
    state: StateId,
    datum: DataValue,
    tests: &[super::BasicTest],
) -> bool {
    tests.iter().all(|t| {
        let v = match &t.kind {
            TestKind::State(q) => state == *q,
            TestKind::Label(a) => {
                aut.label_index(&tree.node(pos).unwrap().label) == Some(*a)
            }
            TestKind::Internal(b) => {
                let name = tree.node(pos).unwrap().internal.as_deref().expect("internal labels");
                aut.internal_index(name) == Some(*b)
            }
            TestKind::InternalIn(set) => {
                let name = tree.node(pos).unwrap().internal.as_deref().expect("internal labels");
                aut.internal_index(name).is_some_and(|b| set.contains(&b))
            }
            TestKind::Root => pos.is_root(),
            TestKind::Leaf => tree.is_leaf(pos),
            TestKind::EqData => tree.node(pos).unwrap().datum == datum,
            TestKind::Down { test, mode } => down_test(aut, tree, pos, datum, *test, *mode),
        };
        v == t.positive
    })
}

/// Existence of a downward path from `pos` matching the test's language and
/// ending at a datum in the stated relation to the register.
fn down_test(
    aut: &Buda,
    tree: &DataTree,
    pos: &Position,
    datum: DataValue,
    test: crate::semigroup::TestId,
    mode: DownMode,
) -> bool {
    fn walk(
        aut: &Buda,
        tree: &DataTree,
        pos: &Position,
        acc: ElemId,
        datum: DataValue,
        test: crate::semigroup::TestId,
        mode: DownMode,
    ) -> bool {
        let here = tree.node(pos).unwrap().datum;
        let data_ok = match mode {
            DownMode::Eq => here == datum,
            DownMode::Neq => here != datum,
            DownMode::Any => true,
        };
        if data_ok && aut.rec().test_accepts_elem(test, acc) {
            return true;
        }
        tree.children(pos).any(|ch| {
            let next = aut.rec().product(acc, aut.rec().letter_image(node_letter(aut, tree, &ch)));
            walk(aut, tree, &ch, next, datum, test, mode)
        })
    }
    let start = aut.rec().letter_image(node_letter(aut, tree, pos));
    walk(aut, tree, pos, start, datum, test, mode)
}

/// Enumerates `(h(word), endpoint datum)` over all downward paths from `pos`;
/// brute-force companion used to cross-check summary computations.
pub fn all_downward_paths(
    aut: &Buda,
    tree: &DataTree,
    pos: &Position,
) -> Vec<(ElemId, DataValue)> {
    fn walk(aut: &Buda, tree: &DataTree, pos: &Position, acc: ElemId, out: &mut Vec<(ElemId, DataValue)>) {
        out.push((acc, tree.node(pos).unwrap().datum));
        for ch in tree.children(pos) {
            let next = aut.rec().product(acc, aut.rec().letter_image(node_letter(aut, tree, &ch)));
            walk(aut, tree, &ch, next, out);
        }
    }
    let mut out = Vec::new();
    let start = aut.rec().letter_image(node_letter(aut, tree, pos));
    walk(aut, tree, pos, start, &mut out);
    out
}
