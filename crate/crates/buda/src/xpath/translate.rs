//! Compilation of node expressions into stay-action automata.
//!
//! The automaton accepts a tree iff the formula holds somewhere. Every leaf
//! spawns, besides per-level summary checkers, a climber that walks to the
//! root and asks there for a downward path to a node certified to satisfy the
//! formula. Certification works through the internal alphabet: each letter
//! fixes, per level, the submonoid of loop summaries realizable at the node,
//! and the checkers enforce that choice bottom-up by guessing which formulas
//! of the level hold at the node (verifying each guess with one thread per
//! formula) and reading the children's certified summaries off their internal
//! letters.
//!
//! Verification threads are spawned by moves from the node below, so chains
//! of same-node steps fuse into single transitions: boolean structure is
//! resolved into spawn options at the spawner, a positive data test guesses
//! its witness into a fork that tests both path sides at once, and a negated
//! data test spawns, per subtree datum delivered by a universal move, a
//! handler that either rules the datum out on one side or chases the other
//! side (accumulating loop summaries into its monoid value at each ancestor)
//! to a contradiction. Stay actions remain only where a node has nothing
//! below it: at leaves, where the initial state's cascade covers them, and in
//! the one stay-store the universal-move elimination introduces.

use std::collections::{BTreeSet, HashMap};

use crate::automaton::{
    AutomatonError, BasicAction, BasicTest, Buda, BudaEps, DownMode, StateId, TestKind, Transition,
};
use crate::semigroup::nfa::{LetterSet, Nfa, NfaEdge};
use crate::semigroup::regex::{RawLetter, Regex};
use crate::semigroup::{CompileOptions, TestId, TestSuite};

use super::levels::{nesting_levels_with_extra, FormulaId, LevelError, Levels, MElem, PathId};
use super::{NodeExpr, PathExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error(transparent)]
    Level(#[from] LevelError),
    #[error("internal alphabet budget exceeded ({0})")]
    AlphabetTooBig(usize),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

const W_FAMILY_CAP: usize = 64;
const ALPHABET_CAP: usize = 1_024;

/// Whether a state is entered by stay actions (leaf cascades) or by moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Flavor {
    Stay,
    Move,
}
use Flavor::{Move, Stay};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum PMode {
    Eq,
    Neq,
    Exists,
    NotEq,
    NotNeq,
    NotExists,
}

impl PMode {
    fn positive(&self) -> bool {
        matches!(self, PMode::Eq | PMode::Neq | PMode::Exists)
    }

    fn down_mode(&self) -> DownMode {
        match self {
            PMode::Eq | PMode::NotEq => DownMode::Eq,
            PMode::Neq | PMode::NotNeq => DownMode::Neq,
            PMode::Exists | PMode::NotExists => DownMode::Any,
        }
    }


}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum TState {
    Q0,
    Climb(Flavor),
    Checker(usize, Flavor),
    /// Verifies one literal (label or its negation, or truth) at the node.
    Atom(FormulaId, Flavor),
    /// Carries the guessed witness of a positive data test; its body runs
    /// both path sides at the node.
    Fork(FormulaId, Flavor),
    /// Climbing continuation of one path side.
    Path { path: PathId, nu: MElem, mode: PMode, level: usize },
    /// Negated data test at the node and all its ancestors.
    Pair { a: PathId, b: PathId, nu: MElem, neq: bool, level: usize, flavor: Flavor },
    /// Handles one delivered datum for a negated data test.
    Branch { first: PathId, second: PathId, nu: MElem, neq: bool, level: usize },
}

pub struct Translation {
    pub aut: BudaEps,
    pub levels: Levels,
    /// Per internal letter, per level: index into the level's submonoid family.
    pub b_components: Vec<Vec<usize>>,
    /// Per level: the family of certifiable submonoids.
    pub w_family: Vec<Vec<BTreeSet<MElem>>>,
}

struct Builder {
    levels: Levels,
    wrapper_pid: PathId,
    w_family: Vec<Vec<BTreeSet<MElem>>>,
    u_family: Vec<Vec<BTreeSet<MElem>>>,
    b_components: Vec<Vec<usize>>,
    labels: Vec<String>,
    internals: Vec<String>,
    states: Vec<String>,
    eps: Vec<bool>,
    rank: Vec<u32>,
    ids: HashMap<TState, StateId>,
    work: Vec<TState>,
    transitions: Vec<Transition>,
    suite: TestSuite,
    level_space: Vec<usize>,
    child_space: Vec<usize>,
    exp_tests: HashMap<(usize, PathId, MElem), TestId>,
    child_tests: HashMap<(usize, MElem), TestId>,
}

impl Builder {
    fn alphabet_len(&self) -> usize {
        self.labels.len() * self.internals.len()
    }

    fn state(&mut self, s: TState) -> StateId {
        if let Some(&id) = self.ids.get(&s) {
            return id;
        }
        // Stay ranks: initial 0, leaf spawns 1, their spawns 2, handlers 3.
        let (eps, rank) = match &s {
            TState::Q0 => (false, 0),
            TState::Climb(f) | TState::Checker(_, f) => (*f == Stay, 1),
            TState::Atom(_, f) | TState::Fork(_, f) => (*f == Stay, 2),
            TState::Pair { flavor, .. } => (*flavor == Stay, 2),
            TState::Branch { .. } => (true, 3),
            TState::Path { .. } => (false, 1),
        };
        self.states.push(format!("s{}", self.states.len()));
        self.eps.push(eps);
        self.rank.push(rank);
        let id = (self.states.len() - 1) as StateId;
        self.ids.insert(s.clone(), id);
        self.work.push(s);
        id
    }

    /// Internal letters whose component at `level` is family member `w`.
    fn class_of(&self, level: usize, w: usize) -> BTreeSet<u32> {
        (0..self.internals.len() as u32)
            .filter(|&b| self.b_components[b as usize][level] == w)
            .collect()
    }

    /// Round-trip contributions of a child certifying family member `w`.
    fn dset(&self, level: usize, w: usize) -> BTreeSet<MElem> {
        let lvl = &self.levels.levels[level];
        self.w_family[level][w]
            .iter()
            .map(|&v| lvl.monoid.mul(lvl.monoid.mul(lvl.g_down, v), lvl.g_up))
            .collect()
    }

    /// The joint descent machine of a level: state 0 is the entry, state 1+u
    /// holds the accumulated monoid value u.
    fn ensure_level_space(&mut self, level: usize) -> usize {
        if self.level_space[level] != usize::MAX {
            return self.level_space[level];
        }
        let alen = self.alphabet_len();
        let n_int = self.internals.len();
        let m_n = self.levels.levels[level].monoid.n;
        let mut edges = Vec::new();
        for w in 0..self.w_family[level].len() {
            let class = self.class_of(level, w);
            if class.is_empty() {
                continue;
            }
            let letters = LetterSet::from_iter(
                alen,
                (0..self.labels.len()).flat_map(|a| {
                    class.iter().map(move |&b| a * n_int + b as usize).collect::<Vec<_>>()
                }),
            );
            for nu_loop in self.w_family[level][w].clone() {
                edges.push(NfaEdge { from: 0, letters: letters.clone(), to: 1 + nu_loop as usize });
                for u in 0..m_n as MElem {
                    let lvl = &self.levels.levels[level];
                    let next = lvl.monoid.mul(lvl.monoid.mul(u, lvl.g_down), nu_loop);
                    edges.push(NfaEdge {
                        from: 1 + u as usize,
                        letters: letters.clone(),
                        to: 1 + next as usize,
                    });
                }
            }
        }
        let nfa =
            Nfa { n_states: 1 + m_n, alphabet_len: alen, starts: vec![0], accepts: vec![], edges };
        self.suite.spaces.push(nfa);
        let idx = self.suite.spaces.len() - 1;
        self.level_space[level] = idx;
        idx
    }

    /// Words some descent from the current node can spell while completing
    /// the path under the accumulated monoid value.
    fn exp_test(&mut self, level: usize, path: PathId, nu: MElem) -> TestId {
        if let Some(&t) = self.exp_tests.get(&(level, path, nu)) {
            return t;
        }
        let space = self.ensure_level_space(level);
        let lvl = &self.levels.levels[level];
        let accepts: Vec<usize> = (0..lvl.monoid.n as MElem)
            .filter(|&u| lvl.accepting[&path].contains(&lvl.monoid.mul(nu, u)))
            .map(|u| 1 + u as usize)
            .collect();
        let t = self.suite.add_shared(space, vec![0], accepts, String::new());
        self.exp_tests.insert((level, path, nu), t);
        t
    }

    /// Two-letter machine per level: some child's round trips contribute `m`.
    fn ensure_child_space(&mut self, level: usize) -> usize {
        if self.child_space[level] != usize::MAX {
            return self.child_space[level];
        }
        let m_count = self.levels.levels[level].monoid.n;
        let alen = self.alphabet_len();
        let n_int = self.internals.len();
        let mut edges = vec![NfaEdge { from: 0, letters: LetterSet::full(alen), to: 1 }];
        for m in 0..m_count as MElem {
            let letters = LetterSet::from_iter(
                alen,
                (0..self.labels.len()).flat_map(|a| {
                    (0..n_int)
                        .filter(|&b| self.dset(level, self.b_components[b][level]).contains(&m))
                        .map(move |b| a * n_int + b)
                        .collect::<Vec<_>>()
                }),
            );
            if !letters.is_empty() {
                edges.push(NfaEdge { from: 1, letters, to: 2 + m as usize });
            }
        }
        let nfa = Nfa {
            n_states: 2 + m_count,
            alphabet_len: alen,
            starts: vec![0],
            accepts: vec![],
            edges,
        };
        self.suite.spaces.push(nfa);
        let idx = self.suite.spaces.len() - 1;
        self.child_space[level] = idx;
        idx
    }

    fn child_test(&mut self, level: usize, m: MElem) -> TestId {
        if let Some(&t) = self.child_tests.get(&(level, m)) {
            return t;
        }
        let space = self.ensure_child_space(level);
        let t = self.suite.add_shared(space, vec![0], vec![2 + m as usize], String::new());
        self.child_tests.insert((level, m), t);
        t
    }

    fn add(&mut self, test: Vec<BasicTest>, mut action: Vec<BasicAction>) {
        if action.is_empty() {
            action.push(BasicAction::Accept);
        }
        self.transitions.push(Transition::new(test, action));
    }

    /// The pair monoid level of a two-sided data test.
    fn pair_level(&self, a: PathId, b: PathId) -> usize {
        self.levels.path_level[a].max(self.levels.path_level[b])
    }

    /// Spawn options verifying formula `f` at the node the spawn lands on:
    /// each option is one action set (boolean structure resolved here).
    /// Returns no options when the formula cannot hold.
    fn spawn_options(&mut self, f: FormulaId, flavor: Flavor) -> Vec<Vec<BasicAction>> {
        let formula = self.levels.formulas[f].clone();
        match formula {
            NodeExpr::True => vec![vec![]],
            NodeExpr::Label(_) => vec![vec![BasicAction::Keep(self.state(TState::Atom(f, flavor)))]],
            NodeExpr::And(x, y) => {
                let fx = self.levels.formula_id(&x).unwrap();
                let fy = self.levels.formula_id(&y).unwrap();
                let ox = self.spawn_options(fx, flavor);
                let oy = self.spawn_options(fy, flavor);
                let mut out = Vec::new();
                for a in &ox {
                    for b in &oy {
                        let mut v = a.clone();
                        v.extend(b.iter().cloned());
                        out.push(v);
                    }
                }
                out
            }
            NodeExpr::Or(x, y) => {
                let fx = self.levels.formula_id(&x).unwrap();
                let fy = self.levels.formula_id(&y).unwrap();
                let mut out = self.spawn_options(fx, flavor);
                out.extend(self.spawn_options(fy, flavor));
                out
            }
            NodeExpr::Some(_) => {
                vec![vec![BasicAction::Keep(self.state(TState::Fork(f, flavor)))]]
            }
            NodeExpr::Eq(..) | NodeExpr::Neq(..) => {
                vec![vec![BasicAction::Guess(self.state(TState::Fork(f, flavor)))]]
            }
            NodeExpr::Not(inner) => match *inner {
                NodeExpr::True => vec![],
                NodeExpr::Label(_) => {
                    vec![vec![BasicAction::Keep(self.state(TState::Atom(f, flavor)))]]
                }
                NodeExpr::And(x, y) => {
                    let fx = self.levels.formula_id(&simple_neg(&x)).unwrap();
                    let fy = self.levels.formula_id(&simple_neg(&y)).unwrap();
                    let mut out = self.spawn_options(fx, flavor);
                    out.extend(self.spawn_options(fy, flavor));
                    out
                }
                NodeExpr::Or(x, y) => {
                    let fx = self.levels.formula_id(&simple_neg(&x)).unwrap();
                    let fy = self.levels.formula_id(&simple_neg(&y)).unwrap();
                    let ox = self.spawn_options(fx, flavor);
                    let oy = self.spawn_options(fy, flavor);
                    let mut out = Vec::new();
                    for a in &ox {
                        for b in &oy {
                            let mut v = a.clone();
                            v.extend(b.iter().cloned());
                            out.push(v);
                        }
                    }
                    out
                }
                NodeExpr::Not(x) => {
                    let fx = self.levels.formula_id(&x).unwrap();
                    self.spawn_options(fx, flavor)
                }
                NodeExpr::Some(_) => {
                    vec![vec![BasicAction::Keep(self.state(TState::Fork(f, flavor)))]]
                }
                NodeExpr::Eq(x, y) | NodeExpr::Neq(x, y) => {
                    let neq = matches!(self.levels.formulas[f], NodeExpr::Not(ref i) if matches!(**i, NodeExpr::Neq(..)));
                    let pa = self.levels.path_id(&x).unwrap();
                    let pb = self.levels.path_id(&y).unwrap();
                    let level = self.pair_level(pa, pb);
                    let unit = self.levels.levels[level].monoid.unit();
                    vec![vec![BasicAction::Keep(self.state(TState::Pair {
                        a: pa,
                        b: pb,
                        nu: unit,
                        neq,
                        level,
                        flavor,
                    }))]]
                }
            },
        }
    }

    /// Options for one path side at the node: (local tests, climb actions).
    /// Positive modes choose one option; negated modes must satisfy all of
    /// them, which `pair_body`/fork composition handles by conjunction.
    fn path_options(
        &mut self,
        path: PathId,
        nu: MElem,
        mode: PMode,
        level: usize,
    ) -> Vec<(Vec<BasicTest>, Vec<BasicAction>)> {
        let t_exp = self.exp_test(level, path, nu);
        let dm = mode.down_mode();
        let mut out = Vec::new();
        if mode.positive() {
            out.push((
                vec![BasicTest::pos(TestKind::Down { test: t_exp, mode: dm })],
                vec![],
            ));
            for w in 0..self.w_family[level].len() {
                let class = self.class_of(level, w);
                if class.is_empty() {
                    continue;
                }
                for nu_loop in self.w_family[level][w].clone() {
                    let nu2 = {
                        let lvl = &self.levels.levels[level];
                        lvl.monoid.mul(lvl.monoid.mul(nu, nu_loop), lvl.g_up)
                    };
                    let target = self.state(TState::Path { path, nu: nu2, mode, level });
                    out.push((
                        vec![
                            BasicTest::neg(TestKind::Root),
                            BasicTest::pos(TestKind::InternalIn(class.clone())),
                        ],
                        vec![BasicAction::Keep(target)],
                    ));
                }
            }
        } else {
            let local = BasicTest::neg(TestKind::Down { test: t_exp, mode: dm });
            out.push((vec![local.clone(), BasicTest::pos(TestKind::Root)], vec![]));
            for w in 0..self.w_family[level].len() {
                let class = self.class_of(level, w);
                if class.is_empty() {
                    continue;
                }
                let mut action = Vec::new();
                for nu_loop in self.w_family[level][w].clone() {
                    let nu2 = {
                        let lvl = &self.levels.levels[level];
                        lvl.monoid.mul(lvl.monoid.mul(nu, nu_loop), lvl.g_up)
                    };
                    action.push(BasicAction::Keep(
                        self.state(TState::Path { path, nu: nu2, mode, level }),
                    ));
                }
                action.sort();
                action.dedup();
                out.push((
                    vec![
                        local.clone(),
                        BasicTest::neg(TestKind::Root),
                        BasicTest::pos(TestKind::InternalIn(class)),
                    ],
                    action,
                ));
            }
        }
        out
    }
}

fn simple_neg(e: &NodeExpr) -> NodeExpr {
    match e {
        NodeExpr::Not(f) => (**f).clone(),
        other => other.clone().not(),
    }
}

fn st(q: StateId) -> BasicTest {
    BasicTest::pos(TestKind::State(q))
}

/// One formula per simple-negation pair of the level.
fn maximal_consistent(levels: &Levels, level: usize) -> Vec<Vec<FormulaId>> {
    let mut pairs: Vec<(FormulaId, FormulaId)> = Vec::new();
    let mut seen = BTreeSet::new();
    for &f in &levels.levels[level].formulas {
        let g = levels.neg_of[f];
        let key = (f.min(g), f.max(g));
        if seen.insert(key) {
            pairs.push(key);
        }
    }
    let mut out: Vec<Vec<FormulaId>> = vec![vec![]];
    for (f, g) in pairs {
        let mut next = Vec::new();
        for base in &out {
            let mut v1 = base.clone();
            v1.push(f);
            next.push(v1);
            if g != f {
                let mut v2 = base.clone();
                v2.push(g);
                next.push(v2);
            }
        }
        out = next;
    }
    out
}

fn emit_state(b: &mut Builder, s: &TState) {
    let sid = b.ids[s];
    match s.clone() {
        TState::Q0 => {
            let top = b.levels.top();
            let mut action = Vec::new();
            for i in 0..=top {
                let c = b.state(TState::Checker(i, Stay));
                action.push(BasicAction::Guess(c));
            }
            let climb = b.state(TState::Climb(Stay));
            action.push(BasicAction::Guess(climb));
            b.add(vec![st(sid)], action);
        }
        TState::Climb(_) => {
            let climb_m = b.state(TState::Climb(Move));
            b.add(vec![st(sid), BasicTest::neg(TestKind::Root)], vec![BasicAction::Keep(climb_m)]);
            let top = b.levels.top();
            let wrapper = b.wrapper_pid;
            let unit = b.levels.levels[top].monoid.unit();
            let t_w = b.exp_test(top, wrapper, unit);
            b.add(
                vec![
                    st(sid),
                    BasicTest::pos(TestKind::Root),
                    BasicTest::pos(TestKind::Down { test: t_w, mode: DownMode::Any }),
                ],
                vec![BasicAction::Accept],
            );
        }
        TState::Checker(i, flavor) => {
            let m_n = b.levels.levels[i].monoid.n;
            let choices = maximal_consistent(&b.levels, i);
            let u_family = b.u_family[i].clone();
            for l_choice in choices {
                let gens: Vec<MElem> =
                    l_choice.iter().map(|f| b.levels.levels[i].g_filter[f]).collect();
                for u in &u_family {
                    let value: BTreeSet<MElem> = {
                        let lvl = &b.levels.levels[i];
                        lvl.monoid.generated(gens.iter().copied().chain(u.iter().copied()))
                    };
                    let w_idx = match b.w_family[i].iter().position(|w| *w == value) {
                        Some(w) => w,
                        None => continue,
                    };
                    let own_class = b.class_of(i, w_idx);
                    if own_class.is_empty() {
                        continue;
                    }
                    let mut test = vec![st(sid), BasicTest::pos(TestKind::InternalIn(own_class))];
                    // Only elements some child can actually contribute.
                    let achievable: BTreeSet<MElem> = (0..b.w_family[i].len())
                        .flat_map(|w| b.dset(i, w))
                        .collect();
                    let _ = m_n;
                    for m in achievable {
                        let t = b.child_test(i, m);
                        test.push(BasicTest {
                            positive: u.contains(&m),
                            kind: TestKind::Down { test: t, mode: DownMode::Any },
                        });
                    }
                    // One spawn choice per formula of the guessed set.
                    let mut spawn_sets: Vec<Vec<BasicAction>> = vec![vec![]];
                    for &f in &l_choice {
                        let opts = b.spawn_options(f, flavor);
                        let mut next = Vec::new();
                        for base in &spawn_sets {
                            for o in &opts {
                                let mut v = base.clone();
                                v.extend(o.iter().cloned());
                                next.push(v);
                            }
                        }
                        spawn_sets = next;
                    }
                    let checker_m = b.state(TState::Checker(i, Move));
                    for spawn in spawn_sets {
                        let mut t_up = test.clone();
                        t_up.push(BasicTest::neg(TestKind::Root));
                        let mut a_up = spawn.clone();
                        a_up.push(BasicAction::Keep(checker_m));
                        b.add(t_up, a_up);
                        let mut t_root = test.clone();
                        t_root.push(BasicTest::pos(TestKind::Root));
                        let mut a_root = spawn.clone();
                        a_root.push(BasicAction::Accept);
                        b.add(t_root, a_root);
                    }
                }
            }
        }
        TState::Atom(f, _) => {
            let (label, positive) = match &b.levels.formulas[f] {
                NodeExpr::Label(a) => (a.clone(), true),
                NodeExpr::Not(inner) => match &**inner {
                    NodeExpr::Label(a) => (a.clone(), false),
                    other => unreachable!("atom state for !{other}"),
                },
                other => unreachable!("atom state for {other}"),
            };
            match b.labels.iter().position(|l| *l == label) {
                Some(li) => b.add(
                    vec![
                        st(sid),
                        BasicTest { positive, kind: TestKind::Label(li as u32) },
                    ],
                    vec![BasicAction::Accept],
                ),
                // A label outside the alphabet never holds.
                None if !positive => b.add(vec![st(sid)], vec![BasicAction::Accept]),
                None => {}
            }
        }
        TState::Fork(f, _) => {
            // Both sides of the test run at this node with the carried value.
            let (pa, pb, mode_b) = match &b.levels.formulas[f] {
                NodeExpr::Eq(x, y) => (x.clone(), y.clone(), PMode::Eq),
                NodeExpr::Neq(x, y) => (x.clone(), y.clone(), PMode::Neq),
                NodeExpr::Some(p) => (p.clone(), p.clone(), PMode::Exists),
                NodeExpr::Not(inner) => match &**inner {
                    NodeExpr::Some(p) => (p.clone(), p.clone(), PMode::NotExists),
                    other => unreachable!("fork for !{other}"),
                },
                other => unreachable!("fork for {other}"),
            };
            let a_id = b.levels.path_id(&pa).unwrap();
            let b_id = b.levels.path_id(&pb).unwrap();
            let level = b.pair_level(a_id, b_id);
            let unit = b.levels.levels[level].monoid.unit();
            match mode_b {
                PMode::Exists => {
                    for (test, action) in b.path_options(a_id, unit, PMode::Exists, level) {
                        let mut t = vec![st(sid)];
                        t.extend(test);
                        b.add(t, action);
                    }
                }
                PMode::NotExists => {
                    for (test, action) in b.path_options(a_id, unit, PMode::NotExists, level) {
                        let mut t = vec![st(sid)];
                        t.extend(test);
                        b.add(t, action);
                    }
                }
                eq_or_neq => {
                    let oa = b.path_options(a_id, unit, PMode::Eq, level);
                    let ob = b.path_options(b_id, unit, eq_or_neq, level);
                    for (ta, aa) in &oa {
                        for (tb, ab) in &ob {
                            let mut t = vec![st(sid)];
                            t.extend(ta.iter().cloned());
                            t.extend(tb.iter().cloned());
                            let mut a = aa.clone();
                            a.extend(ab.iter().cloned());
                            b.add(t, a);
                        }
                    }
                }
            }
        }
        TState::Path { path, nu, mode, level } => {
            for (test, action) in b.path_options(path, nu, mode, level) {
                let mut t = vec![st(sid)];
                t.extend(test);
                b.add(t, action);
            }
        }
        TState::Pair { a, b: pb, nu, neq, level, flavor } => {
            let br_a = b.state(TState::Branch { first: a, second: pb, nu, neq, level });
            let br_b = b.state(TState::Branch { first: pb, second: a, nu, neq, level });
            let _ = flavor;
            b.add(
                vec![st(sid), BasicTest::pos(TestKind::Root)],
                vec![BasicAction::Univ(br_a), BasicAction::Univ(br_b)],
            );
            for w in 0..b.w_family[level].len() {
                let class = b.class_of(level, w);
                if class.is_empty() {
                    continue;
                }
                let mut action = vec![BasicAction::Univ(br_a), BasicAction::Univ(br_b)];
                for nu_loop in b.w_family[level][w].clone() {
                    let nu2 = {
                        let lvl = &b.levels.levels[level];
                        lvl.monoid.mul(lvl.monoid.mul(nu, nu_loop), lvl.g_up)
                    };
                    action.push(BasicAction::Keep(b.state(TState::Pair {
                        a,
                        b: pb,
                        nu: nu2,
                        neq,
                        level,
                        flavor: Move,
                    })));
                }
                action.sort();
                action.dedup();
                b.add(
                    vec![
                        st(sid),
                        BasicTest::neg(TestKind::Root),
                        BasicTest::pos(TestKind::InternalIn(class)),
                    ],
                    action,
                );
            }
        }
        TState::Branch { first, second, nu, neq, level } => {
            let t_first = b.exp_test(level, first, nu);
            let reach =
                BasicTest::pos(TestKind::Down { test: t_first, mode: DownMode::Eq });
            // Either the datum is not reachable on the first side, or the
            // second side must fail for it everywhere; the second side's
            // local failure and ancestor continuations fuse in here.
            b.add(
                vec![st(sid), BasicTest::neg(TestKind::Down { test: t_first, mode: DownMode::Eq })],
                vec![BasicAction::Accept],
            );
            let mode = if neq { PMode::NotNeq } else { PMode::NotEq };
            for (test, action) in b.path_options(second, nu, mode, level) {
                let mut t = vec![st(sid), reach.clone()];
                t.extend(test);
                b.add(t, action);
            }
        }
    }
}

/// Per-level submonoid families and achievable child round-trip unions.
type Families = (Vec<Vec<BTreeSet<MElem>>>, Vec<Vec<BTreeSet<MElem>>>);

fn build_w_family(levels: &Levels) -> Result<Families, TranslateError> {
    let mut w_all = Vec::new();
    let mut u_all = Vec::new();
    for i in 0..levels.levels.len() {
        let lvl = &levels.levels[i];
        let dset = |v: &BTreeSet<MElem>| -> BTreeSet<MElem> {
            v.iter().map(|&x| lvl.monoid.mul(lvl.monoid.mul(lvl.g_down, x), lvl.g_up)).collect()
        };
        let mut w: Vec<BTreeSet<MElem>> = Vec::new();
        for l_choice in maximal_consistent(levels, i) {
            let gens: Vec<MElem> = l_choice.iter().map(|f| lvl.g_filter[f]).collect();
            let sub = lvl.monoid.generated(gens);
            if !w.contains(&sub) {
                w.push(sub);
            }
        }
        loop {
            let mut grew = false;
            let snapshot = w.clone();
            for base in &snapshot {
                for beta in &snapshot {
                    let mut gens: BTreeSet<MElem> = base.clone();
                    gens.extend(dset(beta));
                    let sub = lvl.monoid.generated(gens);
                    if !w.contains(&sub) {
                        if w.len() >= W_FAMILY_CAP {
                            return Err(TranslateError::AlphabetTooBig(w.len()));
                        }
                        w.push(sub);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let mut u: Vec<BTreeSet<MElem>> = vec![BTreeSet::new()];
        loop {
            let mut grew = false;
            let snapshot = u.clone();
            for base in &snapshot {
                for beta in &w {
                    let mut union = base.clone();
                    union.extend(dset(beta));
                    if !u.contains(&union) {
                        if u.len() >= W_FAMILY_CAP {
                            return Err(TranslateError::AlphabetTooBig(u.len()));
                        }
                        u.push(union);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        w_all.push(w);
        u_all.push(u);
    }
    Ok((w_all, u_all))
}

/// Compiles the formula into a stay-action automaton over the given labels.
pub fn translate(
    eta: &NodeExpr,
    labels: &[String],
    opts: &CompileOptions,
) -> Result<Translation, TranslateError> {
    let eta_n = eta.nnf();
    let wrapper = PathExpr::seq(
        PathExpr::Star(Box::new(PathExpr::Down)),
        PathExpr::Filter(Box::new(eta_n.clone())),
    );
    let levels = nesting_levels_with_extra(&eta_n, &[wrapper.clone()])?;
    let wrapper_pid = levels.path_id(&wrapper).expect("wrapper registered");

    let (w_family, u_family) = build_w_family(&levels)?;
    let mut b_components: Vec<Vec<usize>> = vec![vec![]];
    for w in &w_family {
        let mut next = Vec::new();
        for base in &b_components {
            for k in 0..w.len() {
                let mut v = base.clone();
                v.push(k);
                next.push(v);
            }
        }
        b_components = next;
        if b_components.len() > ALPHABET_CAP {
            return Err(TranslateError::AlphabetTooBig(b_components.len()));
        }
    }
    let internals: Vec<String> = (0..b_components.len()).map(|k| format!("t{k}")).collect();

    let n_levels = levels.levels.len();
    let mut builder = Builder {
        levels,
        wrapper_pid,
        w_family,
        u_family,
        b_components,
        labels: labels.to_vec(),
        internals,
        states: Vec::new(),
        eps: Vec::new(),
        rank: Vec::new(),
        ids: HashMap::new(),
        work: Vec::new(),
        transitions: Vec::new(),
        suite: TestSuite::default(),
        level_space: vec![usize::MAX; n_levels],
        child_space: vec![usize::MAX; n_levels],
        exp_tests: HashMap::new(),
        child_tests: HashMap::new(),
    };
    let q0 = builder.state(TState::Q0);
    while let Some(s) = builder.work.pop() {
        emit_state(&mut builder, &s);
    }

    let aut = Buda::new(
        builder.labels,
        builder.internals,
        builder.states,
        q0,
        builder.transitions,
        builder.suite,
        opts,
    )?;
    let be = BudaEps::new(aut, builder.eps, builder.rank)?;
    Ok(Translation {
        aut: be,
        levels: builder.levels,
        b_components: builder.b_components,
        w_family: builder.w_family,
    })
}

/// The regular expression, over the product alphabet, of the words a descent
/// from the current node can spell while completing `path` under the
/// accumulated value `nu`: the printable form of the shared-machine test.
pub fn exp_of(
    tr: &Translation,
    path: &PathExpr,
    nu: MElem,
    level: usize,
) -> Option<Regex<RawLetter>> {
    let pid = tr.levels.path_id(path)?;
    let aut = &tr.aut.aut;
    let lvl = &tr.levels.levels[level];
    let n_int = aut.internals().len();
    let alen = aut.labels().len() * n_int;
    let mut edges = Vec::new();
    for b in 0..n_int {
        let w = tr.b_components[b][level];
        let letters =
            LetterSet::from_iter(alen, (0..aut.labels().len()).map(move |a| a * n_int + b));
        for &nu_loop in &tr.w_family[level][w] {
            edges.push(NfaEdge { from: 0, letters: letters.clone(), to: 1 + nu_loop as usize });
            for u in 0..lvl.monoid.n as MElem {
                let next = lvl.monoid.mul(lvl.monoid.mul(u, lvl.g_down), nu_loop);
                edges.push(NfaEdge {
                    from: 1 + u as usize,
                    letters: letters.clone(),
                    to: 1 + next as usize,
                });
            }
        }
    }
    let accepts: Vec<usize> = (0..lvl.monoid.n as MElem)
        .filter(|&u| lvl.accepting[&pid].contains(&lvl.monoid.mul(nu, u)))
        .map(|u| 1 + u as usize)
        .collect();
    let nfa =
        Nfa { n_states: 1 + lvl.monoid.n, alphabet_len: alen, starts: vec![0], accepts, edges };
    let re = crate::semigroup::nfa::nfa_to_regex(&nfa);
    Some(re.map(&mut |i: &usize| {
        let a = i / n_int;
        let b = i % n_int;
        RawLetter::Pair(aut.labels()[a].clone(), aut.internals()[b].clone())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::membership::{membership_eps, MemberOptions};
    use crate::oracle::enumerate_trees;
    use crate::xpath::eval::eval;
    use crate::xpath::parser::parse_node_expr;

    fn agree_on_corpus(query: &str, labels: &[&str], max_nodes: usize, max_data: u64) {
        let eta = parse_node_expr(query).unwrap();
        let labels_s: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let tr = translate(&eta, &labels_s, &CompileOptions::default()).unwrap();
        for tree in enumerate_trees(max_nodes, labels, max_data) {
            let want = !eval(&tree, &eta).is_empty();
            let got = membership_eps(&tr.aut, &tree, &MemberOptions::default()).unwrap();
            assert_eq!(got, want, "query {query} on {tree}");
        }
    }

    #[test]
    fn label_formula() {
        agree_on_corpus("a", &["a", "b"], 3, 2);
    }

    #[test]
    fn negated_label_formula() {
        agree_on_corpus("not a", &["a", "b"], 3, 2);
    }

    #[test]
    fn child_data_equality() {
        agree_on_corpus("<down/[a] = down/[b]>", &["a", "b"], 3, 2);
    }

    #[test]
    fn child_data_disequality() {
        agree_on_corpus("<down/[a] != down/[a]>", &["a"], 3, 2);
    }

    #[test]
    fn negated_data_test() {
        agree_on_corpus("not <down/[a] = down/[a]>", &["a"], 3, 2);
    }

    #[test]
    fn existence_test() {
        agree_on_corpus("<down/[b]>", &["a", "b"], 3, 2);
    }
}
