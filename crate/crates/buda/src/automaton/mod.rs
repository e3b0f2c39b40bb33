//! Bottom-up alternating data automata over unranked data trees.
//!
//! An automaton runs threads `(state, datum)` bottom-up. At each node a
//! thread fires one transition: a conjunction of basic tests guarding a
//! conjunction of basic actions. Actions either accept (discharging the
//! thread) or spawn threads at the parent with a register update (`keep`,
//! `store`, `guess`, `univ`). The automaton first guesses an internal label
//! for every node; tests can inspect it, and downward-path tests compare the
//! register against data reachable along label words matching a regular
//! expression.
//!
//! The `eps` variant additionally distinguishes states whose spawned threads
//! stay at the current node instead of moving up; a strict rank order on
//! states keeps such chains finite.

pub mod epsilon;
pub mod eval;
pub mod membership;
pub mod normalize;
pub mod ops;
pub mod text;

use std::collections::BTreeSet;
use std::fmt;

use crate::semigroup::{CompileOptions, Recognizer, SemigroupError, TestId, TestSuite};

pub type StateId = u32;

/// One letter of the product alphabet: indices into `labels` and `internals`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub label: u32,
    pub internal: u32,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(l{},b{})", self.label, self.internal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DownMode {
    /// Path endpoint carries the register's datum.
    Eq,
    /// Path endpoint carries a datum different from the register's.
    Neq,
    /// No condition on the endpoint datum (surface shorthand; rewritten by
    /// normalization).
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TestKind {
    State(StateId),
    Label(u32),
    Internal(u32),
    /// Internal label within a set (a folded disjunction of internal tests).
    InternalIn(BTreeSet<u32>),
    Root,
    Leaf,
    /// Register equals the current node's datum.
    EqData,
    Down { test: TestId, mode: DownMode },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasicTest {
    pub positive: bool,
    pub kind: TestKind,
}

impl BasicTest {
    pub fn pos(kind: TestKind) -> Self {
        BasicTest { positive: true, kind }
    }

    pub fn neg(kind: TestKind) -> Self {
        BasicTest { positive: false, kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicAction {
    Accept,
    Keep(StateId),
    Store(StateId),
    Guess(StateId),
    Univ(StateId),
}

impl BasicAction {
    pub fn target(&self) -> Option<StateId> {
        match self {
            BasicAction::Accept => None,
            BasicAction::Keep(p) | BasicAction::Store(p) | BasicAction::Guess(p) | BasicAction::Univ(p) => {
                Some(*p)
            }
        }
    }

    pub fn with_target(&self, p: StateId) -> BasicAction {
        match self {
            BasicAction::Accept => BasicAction::Accept,
            BasicAction::Keep(_) => BasicAction::Keep(p),
            BasicAction::Store(_) => BasicAction::Store(p),
            BasicAction::Guess(_) => BasicAction::Guess(p),
            BasicAction::Univ(_) => BasicAction::Univ(p),
        }
    }
}

/// A transition: conjunctive test part, conjunctive (nonempty) action part.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub test: Vec<BasicTest>,
    pub action: Vec<BasicAction>,
}

impl Transition {
    pub fn new(mut test: Vec<BasicTest>, mut action: Vec<BasicAction>) -> Transition {
        test.sort();
        test.dedup();
        action.sort();
        action.dedup();
        Transition { test, action }
    }

    /// The unique positive state conjunct, when there is exactly one.
    pub fn state_test(&self) -> Option<StateId> {
        let mut found = None;
        for t in &self.test {
            if let TestKind::State(q) = t.kind {
                if t.positive {
                    if found.is_some() {
                        return None;
                    }
                    found = Some(q);
                }
            }
        }
        found
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AutomatonError {
    #[error("state id {0} out of range")]
    BadState(StateId),
    #[error("label id {0} out of range")]
    BadLabel(u32),
    #[error("internal label id {0} out of range")]
    BadInternal(u32),
    #[error("down test id {0} out of range")]
    BadTest(TestId),
    #[error("transition {0} has an empty action part")]
    EmptyAction(usize),
    #[error("initial state out of range")]
    BadInitial,
    #[error("state {state} is spawned as stay-at-node but rank does not increase")]
    RankViolation { state: String },
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error("automaton text: {0}")]
    Text(String),
}

/// Bottom-up data automaton. Immutable once constructed; the recognizer is
/// compiled from the machine suite at construction time.
#[derive(Debug, Clone)]
pub struct Buda {
    labels: Vec<String>,
    internals: Vec<String>,
    states: Vec<String>,
    initial: StateId,
    transitions: Vec<Transition>,
    suite: TestSuite,
    rec: Recognizer<Letter>,
    /// Transition indices by positive state conjunct; the last entry lists
    /// transitions without one (applicable to any state).
    by_state: Vec<Vec<usize>>,
}

impl Buda {
    pub fn new(
        labels: Vec<String>,
        internals: Vec<String>,
        states: Vec<String>,
        initial: StateId,
        transitions: Vec<Transition>,
        suite: TestSuite,
        opts: &CompileOptions,
    ) -> Result<Buda, AutomatonError> {
        assert!(!labels.is_empty() && !internals.is_empty() && !states.is_empty());
        let alphabet: Vec<Letter> = letter_order(labels.len(), internals.len());
        let rec = Recognizer::compile(alphabet, &suite, opts)?;
        // Down tests over an empty language never hold: drop transitions
        // requiring them and drop their vacuous negations.
        let mut simplified = Vec::with_capacity(transitions.len());
        'trans: for tr in transitions {
            let mut test = Vec::with_capacity(tr.test.len());
            for t in tr.test {
                if let TestKind::Down { test: tid, .. } = t.kind {
                    if rec.accepting_elems(tid).next().is_none() {
                        if t.positive {
                            continue 'trans;
                        }
                        continue;
                    }
                }
                test.push(t);
            }
            simplified.push(Transition::new(test, tr.action));
        }
        simplified.sort();
        simplified.dedup();
        let mut by_state: Vec<Vec<usize>> = vec![Vec::new(); states.len() + 1];
        for (i, tr) in simplified.iter().enumerate() {
            match tr.state_test() {
                Some(q) => by_state[q as usize].push(i),
                None => by_state[states.len()].push(i),
            }
        }
        let aut = Buda {
            labels,
            internals,
            states,
            initial,
            transitions: simplified,
            suite,
            rec,
            by_state,
        };
        aut.validate()?;
        Ok(aut)
    }

    fn validate(&self) -> Result<(), AutomatonError> {
        if self.initial as usize >= self.states.len() {
            return Err(AutomatonError::BadInitial);
        }
        for (i, tr) in self.transitions.iter().enumerate() {
            if tr.action.is_empty() {
                return Err(AutomatonError::EmptyAction(i));
            }
            for a in &tr.action {
                if let Some(p) = a.target() {
                    if p as usize >= self.states.len() {
                        return Err(AutomatonError::BadState(p));
                    }
                }
            }
            for t in &tr.test {
                match &t.kind {
                    TestKind::State(q) if *q as usize >= self.states.len() => {
                        return Err(AutomatonError::BadState(*q))
                    }
                    TestKind::Label(a) if *a as usize >= self.labels.len() => {
                        return Err(AutomatonError::BadLabel(*a))
                    }
                    TestKind::Internal(b) if *b as usize >= self.internals.len() => {
                        return Err(AutomatonError::BadInternal(*b))
                    }
                    TestKind::InternalIn(s) => {
                        if let Some(&b) = s.iter().next_back() {
                            if b as usize >= self.internals.len() {
                                return Err(AutomatonError::BadInternal(b));
                            }
                        }
                    }
                    TestKind::Down { test, .. } if *test as usize >= self.rec.test_count() => {
                        return Err(AutomatonError::BadTest(*test))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn internals(&self) -> &[String] {
        &self.internals
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Transitions a thread in state `q` can fire, by index.
    pub fn transitions_for(&self, q: StateId) -> impl Iterator<Item = (usize, &Transition)> {
        self.by_state[q as usize]
            .iter()
            .chain(self.by_state[self.states.len()].iter())
            .map(|&i| (i, &self.transitions[i]))
    }

    pub fn suite(&self) -> &TestSuite {
        &self.suite
    }

    pub fn rec(&self) -> &Recognizer<Letter> {
        &self.rec
    }

    pub fn label_index(&self, name: &str) -> Option<u32> {
        self.labels.iter().position(|l| l == name).map(|i| i as u32)
    }

    pub fn internal_index(&self, name: &str) -> Option<u32> {
        self.internals.iter().position(|l| l == name).map(|i| i as u32)
    }

    /// Index of `(label, internal)` in the recognizer alphabet.
    pub fn letter_id(&self, label: u32, internal: u32) -> u32 {
        label * self.internals.len() as u32 + internal
    }

    pub fn letter_of_id(&self, id: u32) -> Letter {
        Letter { label: id / self.internals.len() as u32, internal: id % self.internals.len() as u32 }
    }

    pub fn letter_name(&self, l: Letter) -> String {
        format!("({},{})", self.labels[l.label as usize], self.internals[l.internal as usize])
    }

    pub fn all_letter_ids(&self) -> impl Iterator<Item = u32> {
        0..(self.labels.len() * self.internals.len()) as u32
    }
}

/// The fixed enumeration order of the product alphabet.
pub fn letter_order(n_labels: usize, n_internals: usize) -> Vec<Letter> {
    let mut v = Vec::with_capacity(n_labels * n_internals);
    for l in 0..n_labels {
        for b in 0..n_internals {
            v.push(Letter { label: l as u32, internal: b as u32 });
        }
    }
    v
}

/// Automaton with stay-at-node actions. States are partitioned by `eps` and
/// strictly ordered by `rank`; an action targeting a stay state must sit in a
/// transition whose test asserts a state of smaller rank.
#[derive(Debug, Clone)]
pub struct BudaEps {
    pub aut: Buda,
    pub eps: Vec<bool>,
    pub rank: Vec<u32>,
}

impl BudaEps {
    pub fn new(aut: Buda, eps: Vec<bool>, rank: Vec<u32>) -> Result<BudaEps, AutomatonError> {
        assert_eq!(eps.len(), aut.states.len());
        assert_eq!(rank.len(), aut.states.len());
        let be = BudaEps { aut, eps, rank };
        be.validate_ranks()?;
        Ok(be)
    }

    fn validate_ranks(&self) -> Result<(), AutomatonError> {
        for tr in &self.aut.transitions {
            for a in &tr.action {
                if let Some(p) = a.target() {
                    if self.eps[p as usize] {
                        let ok = tr.test.iter().any(|t| {
                            t.positive
                                && matches!(t.kind, TestKind::State(q) if self.rank[q as usize] < self.rank[p as usize])
                        });
                        if !ok {
                            return Err(AutomatonError::RankViolation {
                                state: self.aut.states[p as usize].clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Wraps a plain automaton (no stay states).
    pub fn from_buda(aut: Buda) -> BudaEps {
        let n = aut.states.len();
        BudaEps { aut, eps: vec![false; n], rank: vec![0; n] }
    }
}

/// A configuration: the finite set of live threads.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Configuration(pub BTreeSet<(StateId, crate::tree::DataValue)>);

impl Configuration {
    pub fn is_initial(&self, aut: &Buda) -> bool {
        self.0.len() == 1 && self.0.iter().all(|(q, _)| *q == aut.initial)
    }
}
