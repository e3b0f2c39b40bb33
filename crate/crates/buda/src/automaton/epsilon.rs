//! Elimination of stay-at-node actions, producing a plain automaton.
//!
//! Pipeline:
//!
//! 1. Every transition is rewritten to carry exactly one positive state
//!    conjunct and no negated ones (nondeterministic expansion over states).
//! 2. Stay-univ actions are removed, one shared-target family at a time. Each
//!    removal triples the internal alphabet with a mark component: mark 1
//!    flags nodes that simulate the univ, mark 2 their children. Checker
//!    threads launched at every leaf climb to the root validating the
//!    marking, and fire a moving univ whenever they leave a 2-marked node,
//!    delivering every datum of that subtree to the 1-marked parent. The univ
//!    transitions become 1-gated transitions whose stay-store covers the
//!    node's own datum.
//! 3. Remaining stay cascades are flattened in one shot. For every state
//!    entered by moving actions, the symbolic closure of one thread resolves
//!    all stay steps: node-local tests accumulate on the compiled transition,
//!    stay-stores and stay-guesses become symbolic values, moving actions
//!    become emissions tagged by the register they carry. A resolution
//!    without symbolic values compiles to an ordinary transition. One with
//!    symbolic values compiles to a committed-continuation state plus one
//!    companion state per value (running that value's tests and emissions
//!    with its own register, which synchronizes several uses of one guess);
//!    every action site entering the state gains a variant spawning the
//!    continuation and guessed companions alongside.
//! 4. The initial state's cascade fires at leaves, where there is no action
//!    site below to hang companions on; it is expanded separately. Register
//!    tests degenerate at a leaf (the only downward path is the node itself),
//!    so each symbolic value is pinned to the node datum (a store), left free
//!    (a guess), or must differ from the node datum, in which case it can
//!    ride the one arbitrary initial register as long as nothing else reads
//!    it. An outcome needing more than one such carrier has no single leaf
//!    transition; it is dropped and the result is flagged lossy.

use std::collections::{BTreeMap, BTreeSet};

use super::{
    AutomatonError, BasicAction, BasicTest, Buda, BudaEps, DownMode, StateId, TestKind, Transition,
};
use crate::semigroup::nfa::{LetterSet, Nfa, NfaEdge};
use crate::semigroup::{CompileOptions, TestId, TestSuite};

#[derive(Debug, Clone)]
pub struct EpsElimResult {
    pub aut: Buda,
    /// True when some leaf-closure outcome had to be dropped (see step 4).
    pub lossy_leaf_closure: bool,
}

struct Work {
    labels: Vec<String>,
    internals: Vec<String>,
    states: Vec<String>,
    eps: Vec<bool>,
    rank: Vec<u32>,
    initial: StateId,
    transitions: BTreeSet<Transition>,
    suite: TestSuite,
    lossy: bool,
}

impl Work {
    fn add_state(&mut self, name: String, eps: bool, rank: u32) -> StateId {
        self.states.push(name);
        self.eps.push(eps);
        self.rank.push(rank);
        (self.states.len() - 1) as StateId
    }

    fn fresh_name(&self, base: &str) -> String {
        let mut i = 0;
        loop {
            let name = format!("{base}{i}");
            if !self.states.contains(&name) {
                return name;
            }
            i += 1;
        }
    }

    fn assoc(&self, tr: &Transition) -> StateId {
        tr.state_test().expect("state-normalized transition")
    }

    fn is_eps_atom(&self, a: &BasicAction) -> bool {
        a.target().is_some_and(|p| self.eps[p as usize])
    }

    fn alphabet_len(&self) -> usize {
        self.labels.len() * self.internals.len()
    }
}

/// Step 1: exactly one positive state conjunct, no negated state conjuncts.
fn normalize_state_tests(work: &mut Work) {
    let old = std::mem::take(&mut work.transitions);
    let n = work.states.len() as StateId;
    for tr in old {
        let mut pos: Option<StateId> = None;
        let mut conflict = false;
        let mut negs: BTreeSet<StateId> = BTreeSet::new();
        let mut rest: Vec<BasicTest> = Vec::new();
        for t in &tr.test {
            match (&t.kind, t.positive) {
                (TestKind::State(q), true) => match pos {
                    None => pos = Some(*q),
                    Some(p) if p == *q => {}
                    Some(_) => conflict = true,
                },
                (TestKind::State(q), false) => {
                    negs.insert(*q);
                }
                _ => rest.push(t.clone()),
            }
        }
        if conflict {
            continue;
        }
        let candidates: Vec<StateId> = match pos {
            Some(q) => {
                if negs.contains(&q) {
                    continue;
                }
                vec![q]
            }
            None => (0..n).filter(|q| !negs.contains(q)).collect(),
        };
        for q in candidates {
            let mut test = rest.clone();
            test.push(BasicTest::pos(TestKind::State(q)));
            work.transitions.insert(Transition::new(test, tr.action.clone()));
        }
    }
}

fn internal_class(work: &Work, pred: impl Fn(usize) -> bool) -> BTreeSet<u32> {
    (0..work.internals.len()).filter(|&b| pred(b)).map(|b| b as u32).collect()
}

/// Machine test for two-letter words: any letter, then a letter whose
/// internal component lies in `cls`.
fn child_class_test(work: &mut Work, cls: &BTreeSet<u32>) -> TestId {
    let n = work.alphabet_len();
    let n_int = work.internals.len();
    let second = LetterSet::from_iter(
        n,
        (0..work.labels.len()).flat_map(|a| cls.iter().map(move |&b| a * n_int + b as usize)),
    );
    let nfa = Nfa {
        n_states: 3,
        alphabet_len: n,
        starts: vec![0],
        accepts: vec![2],
        edges: vec![
            NfaEdge { from: 0, letters: LetterSet::full(n), to: 1 },
            NfaEdge { from: 1, letters: second, to: 2 },
        ],
    };
    work.suite.add_machine(nfa, String::new())
}

fn lift_internal_tests(tr: &Transition, factor: u32) -> Transition {
    let lift = |b: u32| -> BTreeSet<u32> { (0..factor).map(|m| b * factor + m).collect() };
    let test = tr
        .test
        .iter()
        .map(|t| {
            let kind = match &t.kind {
                TestKind::Internal(b) => TestKind::InternalIn(lift(*b)),
                TestKind::InternalIn(s) => {
                    TestKind::InternalIn(s.iter().flat_map(|&b| lift(b)).collect())
                }
                k => k.clone(),
            };
            BasicTest { positive: t.positive, kind }
        })
        .collect();
    Transition::new(test, tr.action.clone())
}

/// Step 2: eliminate one stay-univ occurrence.
/// Step 2: eliminate one family of stay-univ transitions sharing a target
/// set, with one mark component.
fn eliminate_univ_family(work: &mut Work, victims: Vec<Transition>, targets: &BTreeSet<StateId>) {
    // Triple the internal alphabet with a mark component for this step.
    let old_count = work.internals.len();
    let mut internals = Vec::with_capacity(old_count * 3);
    for b in &work.internals {
        for m in 0..3 {
            internals.push(format!("{b}m{m}"));
        }
    }
    let n_labels = work.labels.len();
    let expansion: Vec<Vec<usize>> = (0..n_labels * old_count)
        .map(|id| {
            let (a, b) = (id / old_count, id % old_count);
            (0..3).map(|m| a * old_count * 3 + b * 3 + m).collect()
        })
        .collect();
    work.internals = internals;
    work.suite.lift_alphabet(&expansion, n_labels * work.internals.len());

    let old_trans = std::mem::take(&mut work.transitions);
    for tr in old_trans {
        work.transitions.insert(lift_internal_tests(&tr, 3));
    }
    let victims: Vec<Transition> = victims.iter().map(|v| lift_internal_tests(v, 3)).collect();
    for v in &victims {
        work.transitions.remove(v);
    }

    let mark = |work: &Work, m: usize| internal_class(work, |b| b % 3 == m);
    let mark1 = mark(work, 1);
    let mark2 = mark(work, 2);
    let not2 = internal_class(work, |b| b % 3 != 2);

    let checker = work.add_state(work.fresh_name("mk"), false, 0);
    // One delivery state per univ target.
    let mut qp: BTreeMap<StateId, StateId> = BTreeMap::new();
    for &u in targets {
        let id = work.add_state(work.fresh_name("uv"), false, work.rank[u as usize]);
        qp.insert(u, id);
    }

    let t_child2 = child_class_test(work, &mark2);
    let t_child_not2 = child_class_test(work, &not2);
    let no_child_2 = BasicTest::neg(TestKind::Down { test: t_child2, mode: DownMode::Any });
    let all_children_2 =
        BasicTest::neg(TestKind::Down { test: t_child_not2, mode: DownMode::Any });

    // The marking checker climbs from every leaf.
    let deliver: Vec<BasicAction> = qp.values().map(|&q| BasicAction::Univ(q)).collect();
    let mark0 = mark(work, 0);
    let mut mark2_action = vec![BasicAction::Keep(checker)];
    mark2_action.extend(deliver.iter().cloned());
    let cases: Vec<(BTreeSet<u32>, BasicTest, Vec<BasicAction>)> = vec![
        (mark0.clone(), no_child_2.clone(), vec![BasicAction::Keep(checker)]),
        (mark1.clone(), all_children_2.clone(), vec![BasicAction::Keep(checker)]),
        (mark2.clone(), no_child_2.clone(), mark2_action.clone()),
    ];
    for (cls, guard, action) in &cases {
        let test = vec![
            BasicTest::pos(TestKind::State(checker)),
            BasicTest::neg(TestKind::Root),
            BasicTest::pos(TestKind::InternalIn(cls.clone())),
            guard.clone(),
        ];
        work.transitions.insert(Transition::new(test, action.clone()));
    }
    for (cls, guard) in [(mark0, no_child_2.clone()), (mark1.clone(), all_children_2)] {
        let test = vec![
            BasicTest::pos(TestKind::State(checker)),
            BasicTest::pos(TestKind::Root),
            BasicTest::pos(TestKind::InternalIn(cls)),
            guard,
        ];
        work.transitions.insert(Transition::new(test, vec![BasicAction::Accept]));
    }

    // Launch the checker from every leaf firing of the initial state, and let
    // 2-marked leaves hand their own datum up.
    let q0 = work.initial;
    let q0_assoc: Vec<Transition> =
        work.transitions.iter().filter(|tr| tr.state_test() == Some(q0)).cloned().collect();
    for tr in q0_assoc {
        if tr.test.iter().any(|t| t.positive && matches!(t.kind, TestKind::Root)) {
            continue; // root discharges stay as they are
        }
        work.transitions.remove(&tr);
        let has_neg_root = tr.test.iter().any(|t| !t.positive && matches!(t.kind, TestKind::Root));
        if !has_neg_root {
            let mut root_test = tr.test.clone();
            root_test.push(BasicTest::pos(TestKind::Root));
            work.transitions.insert(Transition::new(root_test, tr.action.clone()));
        }
        let mut t_plain = tr.test.clone();
        t_plain.push(BasicTest::neg(TestKind::Root));
        t_plain.push(BasicTest::pos(TestKind::InternalIn(not2.clone())));
        let mut a_plain = tr.action.clone();
        a_plain.push(BasicAction::Keep(checker));
        work.transitions.insert(Transition::new(t_plain, a_plain));

        let mut t_mk2 = tr.test.clone();
        t_mk2.push(BasicTest::neg(TestKind::Root));
        t_mk2.push(BasicTest::pos(TestKind::InternalIn(mark2.clone())));
        let mut a_mk2 = tr.action.clone();
        a_mk2.push(BasicAction::Keep(checker));
        a_mk2.extend(deliver.iter().cloned());
        work.transitions.insert(Transition::new(t_mk2, a_mk2));
    }

    // Replace each univ transition with its 1-gated store form.
    for victim in &victims {
        let mut test1 = victim.test.clone();
        test1.push(BasicTest::pos(TestKind::InternalIn(mark1.clone())));
        let mut action1: Vec<BasicAction> = victim
            .action
            .iter()
            .filter(|a| !matches!(a, BasicAction::Univ(u) if targets.contains(u)))
            .cloned()
            .collect();
        for &u in targets {
            action1.push(BasicAction::Store(u));
        }
        work.transitions.insert(Transition::new(test1, action1));
    }

    // Threads delivered by the moving univ behave like the original targets.
    for &u in targets {
        let u_assoc: Vec<Transition> =
            work.transitions.iter().filter(|tr| tr.state_test() == Some(u)).cloned().collect();
        for tr in u_assoc {
            let test: Vec<BasicTest> = tr
                .test
                .iter()
                .map(|t| match t.kind {
                    TestKind::State(q) if q == u && t.positive => {
                        BasicTest::pos(TestKind::State(qp[&u]))
                    }
                    _ => t.clone(),
                })
                .collect();
            work.transitions.insert(Transition::new(test, tr.action.clone()));
        }
    }
}

fn univ_elim_pass(work: &mut Work) {
    loop {
        // All transitions sharing one stay-univ target set go in one step:
        // they impose identical obligations at their marked nodes.
        let sample: Option<BTreeSet<StateId>> = work.transitions.iter().find_map(|tr| {
            // Stay-state cascades only fire inside the leaf closure, where a
            // stay-univ degenerates to the node's own datum.
            if work.assoc(tr) == work.initial || work.eps[work.assoc(tr) as usize] {
                return None;
            }
            let targets: BTreeSet<StateId> = tr
                .action
                .iter()
                .filter_map(|a| match a {
                    BasicAction::Univ(p) if work.eps[*p as usize] => Some(*p),
                    _ => None,
                })
                .collect();
            (!targets.is_empty()).then_some(targets)
        });
        let targets = match sample {
            Some(t) => t,
            None => return,
        };
        let victims: Vec<Transition> = work
            .transitions
            .iter()
            .filter(|tr| {
                if work.assoc(tr) == work.initial || work.eps[work.assoc(tr) as usize] {
                    return false;
                }
                let t: BTreeSet<StateId> = tr
                    .action
                    .iter()
                    .filter_map(|a| match a {
                        BasicAction::Univ(p) if work.eps[*p as usize] => Some(*p),
                        _ => None,
                    })
                    .collect();
                t == targets
            })
            .cloned()
            .collect();
        eliminate_univ_family(work, victims, &targets);
    }
}

/// Step 3: one-shot flattening of all stay cascades rooted at states that
/// moving actions can enter.
fn flatten(work: &mut Work, cap: usize) -> Result<(), AutomatonError> {
    let sens = register_sensitive(work);
    // States hosting threads natively: targets of moving actions.
    let mut hosted: BTreeSet<StateId> = work
        .transitions
        .iter()
        .flat_map(|tr| tr.action.iter().filter_map(|a| a.target()))
        .filter(|&p| !work.eps[p as usize])
        .collect();
    hosted.remove(&work.initial);
    // Only states whose own transitions fire stay actions need flattening.
    let needs: Vec<StateId> = hosted
        .into_iter()
        .filter(|&s| {
            work.transitions.iter().any(|tr| {
                tr.state_test() == Some(s) && tr.action.iter().any(|a| work.is_eps_atom(a))
            })
        })
        .collect();

    // Phase A: closures over the original transition set.
    let dbg = std::env::var("EPS_DEBUG").is_ok();
    let mut closures: Vec<(StateId, Vec<Outcome>)> = Vec::new();
    for &s in &needs {
        let mut outcomes = Vec::new();
        expand_closure(work, false, vec![(s, Reg::Init)], Outcome::default(), &mut outcomes, cap)?;
        outcomes.sort();
        outcomes.dedup();
        if dbg {
            eprintln!("flatten: state {} -> {} outcomes", work.states[s as usize], outcomes.len());
        }
        closures.push((s, outcomes));
    }

    // Phase B: compile. Per state: plain outcomes stay under the state; each
    // symbolic-value outcome gets a continuation state and companions, to be
    // spawned together at every entry site.
    let mut variants: BTreeMap<StateId, Vec<(StateId, Vec<StateId>)>> = BTreeMap::new();
    for (s, outcomes) in &closures {
        let old: Vec<Transition> = work
            .transitions
            .iter()
            .filter(|t| t.state_test() == Some(*s))
            .cloned()
            .collect();
        for t in old {
            work.transitions.remove(&t);
        }
        for o in outcomes {
            // A value nothing reads can ride any register.
            let var_real: Vec<bool> = (0..o.n_vars)
                .map(|v| {
                    o.reg_tests.iter().any(|(r, _)| *r == Reg::Var(v))
                        || o.emits.iter().any(|e| {
                            matches!(e, Emit::WithReg(a, Reg::Var(x))
                                if *x == v && sens[a.target().unwrap() as usize])
                        })
                })
                .collect();
            let mut test: Vec<BasicTest> = o.local.clone();
            for (r, t) in &o.reg_tests {
                match r {
                    Reg::Init => test.push(t.clone()),
                    Reg::Node => {
                        return Err(AutomatonError::Text(
                            "node-pinned register outside a leaf closure".into(),
                        ))
                    }
                    Reg::Var(_) => {} // handled by the companion
                }
            }
            let mut action: Vec<BasicAction> = Vec::new();
            for e in &o.emits {
                match e {
                    Emit::PlainGuess(p) => action.push(BasicAction::Guess(*p)),
                    Emit::PlainUniv(p) => action.push(BasicAction::Univ(*p)),
                    Emit::WithReg(a, Reg::Init) => action.push(BasicAction::Keep(a.target().unwrap())),
                    Emit::WithReg(a, Reg::Node) => action.push(BasicAction::Store(a.target().unwrap())),
                    Emit::WithReg(a, Reg::Var(v)) => {
                        if !var_real[*v] {
                            action.push(BasicAction::Keep(a.target().unwrap()));
                        }
                        // real vars emit through their companion
                    }
                }
            }
            let any_real = var_real.iter().any(|&x| x);
            if !any_real {
                let mut full = test.clone();
                full.push(BasicTest::pos(TestKind::State(*s)));
                if action.is_empty() {
                    action.push(BasicAction::Accept);
                }
                work.transitions.insert(Transition::new(full, action));
                continue;
            }
            // Continuation plus companions.
            let q1 = work.add_state(work.fresh_name(&format!("{}k", work.states[*s as usize])), false, 0);
            let mut comp_ids = Vec::new();
            for v in 0..o.n_vars {
                if !var_real[v] {
                    continue;
                }
                let c = work.add_state(
                    work.fresh_name(&format!("{}v", work.states[*s as usize])),
                    false,
                    0,
                );
                let mut ct: Vec<BasicTest> = o
                    .reg_tests
                    .iter()
                    .filter(|(r, _)| *r == Reg::Var(v))
                    .map(|(_, t)| t.clone())
                    .collect();
                ct.push(BasicTest::pos(TestKind::State(c)));
                let mut ca: Vec<BasicAction> = o
                    .emits
                    .iter()
                    .filter_map(|e| match e {
                        Emit::WithReg(a, Reg::Var(x)) if *x == v => {
                            Some(BasicAction::Keep(a.target().unwrap()))
                        }
                        _ => None,
                    })
                    .collect();
                if ca.is_empty() {
                    ca.push(BasicAction::Accept);
                }
                work.transitions.insert(Transition::new(ct, ca));
                comp_ids.push(c);
            }
            let mut full = test.clone();
            full.push(BasicTest::pos(TestKind::State(q1)));
            if action.is_empty() {
                action.push(BasicAction::Accept);
            }
            work.transitions.insert(Transition::new(full, action));
            variants.entry(*s).or_default().push((q1, comp_ids));
        }
    }

    if dbg {
        eprintln!("flatten compiled: transitions={} states={}", work.transitions.len(), work.states.len());
    }
    // Site expansion: every action atom entering a flattened state also
    // offers its symbolic-value resolutions.
    loop {
        let mut additions: Vec<Transition> = Vec::new();
        for cand in &work.transitions {
            for atom in &cand.action {
                if let Some(p) = atom.target() {
                    if let Some(vs) = variants.get(&p) {
                        for (q1, comps) in vs {
                            let mut action: Vec<BasicAction> =
                                cand.action.iter().filter(|a| *a != atom).cloned().collect();
                            action.push(atom.with_target(*q1));
                            for c in comps {
                                action.push(BasicAction::Guess(*c));
                            }
                            additions.push(Transition::new(cand.test.clone(), action));
                        }
                    }
                }
            }
        }
        let before = work.transitions.len();
        work.transitions.extend(additions);
        if dbg {
            eprintln!("flatten site pass: transitions={}", work.transitions.len());
        }
        if work.transitions.len() == before {
            break;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Step 4: symbolic closure of the initial state's stay cascade.

/// Symbolic register of a thread inside the leaf closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Reg {
    Init,
    Node,
    Var(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Emit {
    WithReg(BasicAction, Reg),
    PlainGuess(StateId),
    PlainUniv(StateId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Outcome {
    /// Register-free conjuncts evaluated at the firing node.
    local: Vec<BasicTest>,
    /// Register-dependent conjuncts, tagged by symbolic register.
    reg_tests: Vec<(Reg, BasicTest)>,
    emits: Vec<Emit>,
    n_vars: usize,
}

fn expand_closure(
    work: &Work,
    leaf: bool,
    mut pending: Vec<(StateId, Reg)>,
    mut acc: Outcome,
    out: &mut Vec<Outcome>,
    cap: usize,
) -> Result<(), AutomatonError> {
    if out.len() > cap {
        return Err(AutomatonError::Text("leaf closure outcome budget exceeded".into()));
    }
    let (q, reg) = match pending.pop() {
        Some(t) => t,
        None => {
            acc.local.sort();
            acc.local.dedup();
            acc.reg_tests.sort();
            acc.reg_tests.dedup();
            acc.emits.sort();
            out.push(acc);
            return Ok(());
        }
    };
    for tr in work.transitions.iter().filter(|t| t.state_test() == Some(q)) {
        let mut acc2 = acc.clone();
        let mut pend2 = pending.clone();
        for t in &tr.test {
            match t.kind {
                TestKind::State(_) => {}
                TestKind::EqData | TestKind::Down { .. } => acc2.reg_tests.push((reg, t.clone())),
                _ => acc2.local.push(t.clone()),
            }
        }
        for a in &tr.action {
            match a {
                BasicAction::Accept => {}
                act => {
                    let p = act.target().unwrap();
                    if work.eps[p as usize] {
                        let r = match act {
                            BasicAction::Keep(_) => reg,
                            BasicAction::Store(_) | BasicAction::Univ(_) if leaf => {
                                // At a leaf the subtree's only datum is the
                                // node's own.
                                Reg::Node
                            }
                            BasicAction::Store(_) => {
                                // A stay-store is a stay-guess checked equal
                                // to the node datum.
                                let v = Reg::Var(acc2.n_vars);
                                acc2.n_vars += 1;
                                acc2.reg_tests.push((v, BasicTest::pos(TestKind::EqData)));
                                v
                            }
                            BasicAction::Univ(_) => {
                                return Err(AutomatonError::Text(
                                    "stay-univ survived its elimination stage".into(),
                                ))
                            }
                            BasicAction::Guess(_) => {
                                let v = Reg::Var(acc2.n_vars);
                                acc2.n_vars += 1;
                                v
                            }
                            BasicAction::Accept => unreachable!(),
                        };
                        pend2.push((p, r));
                    } else {
                        match act {
                            BasicAction::Keep(_) => acc2.emits.push(Emit::WithReg(*act, reg)),
                            BasicAction::Store(_) => {
                                acc2.emits.push(Emit::WithReg(*act, Reg::Node))
                            }
                            BasicAction::Guess(p2) => acc2.emits.push(Emit::PlainGuess(*p2)),
                            BasicAction::Univ(p2) => acc2.emits.push(Emit::PlainUniv(*p2)),
                            BasicAction::Accept => unreachable!(),
                        }
                    }
                }
            }
        }
        expand_closure(work, leaf, pend2, acc2, out, cap)?;
    }
    Ok(())
}

/// Constraint a symbolic value accumulates at the leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pin {
    Free,
    EqNode,
    NeqNode,
    Dead,
}

fn merge_pin(a: Pin, b: Pin) -> Pin {
    use Pin::*;
    match (a, b) {
        (Dead, _) | (_, Dead) => Dead,
        (Free, x) | (x, Free) => x,
        (EqNode, EqNode) => EqNode,
        (NeqNode, NeqNode) => NeqNode,
        _ => Dead,
    }
}

#[derive(Clone)]
struct Branch {
    local: Vec<BasicTest>,
    pins: BTreeMap<usize, Pin>,
    init_tests: Vec<BasicTest>,
    dead: bool,
}

/// Letters whose single-letter word the test accepts.
fn letter_set_of_test(work: &Work, test: TestId) -> LetterSet {
    use crate::semigroup::TestKindSrc;
    let n = work.alphabet_len();
    match &work.suite.tests[test as usize].kind {
        TestKindSrc::LetterClass(ls) => ls.clone(),
        TestKindSrc::AnyLong => LetterSet::empty(n),
        TestKindSrc::Machine { space, starts, accepts } => {
            let sp = &work.suite.spaces[*space];
            LetterSet::from_iter(
                n,
                (0..n).filter(|&c| {
                    sp.edges.iter().any(|e| {
                        e.letters.contains(c) && starts.contains(&e.from) && accepts.contains(&e.to)
                    })
                }),
            )
        }
    }
}

/// The node's letter lies in the set of letters accepted by `test`.
fn letter_fact(work: &mut Work, test: TestId, positive: bool) -> BasicTest {
    let set = letter_set_of_test(work, test);
    let tid = work.suite.add_letter_class(set, String::new());
    BasicTest { positive, kind: TestKind::Down { test: tid, mode: DownMode::Any } }
}

/// States whose threads may ever read their register: they fire a transition
/// testing it (register-to-datum comparisons) or keep into a state that does.
/// Threads headed only into insensitive states can share any register.
fn register_sensitive(work: &Work) -> Vec<bool> {
    let n = work.states.len();
    let mut sens = vec![false; n];
    for tr in &work.transitions {
        let reads = tr.test.iter().any(|t| {
            matches!(
                t.kind,
                TestKind::EqData
                    | TestKind::Down { mode: DownMode::Eq, .. }
                    | TestKind::Down { mode: DownMode::Neq, .. }
            )
        });
        if reads {
            sens[work.assoc(tr) as usize] = true;
        }
    }
    loop {
        let mut grew = false;
        for tr in &work.transitions {
            let s = work.assoc(tr) as usize;
            if sens[s] {
                continue;
            }
            let keeps_into_sensitive = tr.action.iter().any(
                |a| matches!(a, BasicAction::Keep(p) if sens[*p as usize]),
            );
            if keeps_into_sensitive {
                sens[s] = true;
                grew = true;
            }
        }
        if !grew {
            return sens;
        }
    }
}

/// Compiles one closure outcome into plain transitions (branching on how
/// negated constraints resolve). Returns false when a branch was dropped for
/// want of register carriers.
fn compile_outcome(work: &mut Work, o: &Outcome, sens: &[bool], out: &mut BTreeSet<Transition>) -> bool {
    let needs_leaf = o
        .reg_tests
        .iter()
        .any(|(r, t)| *r != Reg::Init && matches!(t.kind, TestKind::Down { .. }));

    let mut branches =
        vec![Branch { local: o.local.clone(), pins: BTreeMap::new(), init_tests: Vec::new(), dead: false }];
    for (reg, t) in &o.reg_tests {
        if *reg == Reg::Init {
            for b in &mut branches {
                b.init_tests.push(t.clone());
            }
            continue;
        }
        let mut next: Vec<Branch> = Vec::new();
        for b in branches.iter().filter(|b| !b.dead) {
            match (reg, &t.kind, t.positive) {
                (Reg::Node, TestKind::EqData, true) => next.push(b.clone()),
                (Reg::Node, TestKind::EqData, false) => {} // contradiction
                (Reg::Var(v), TestKind::EqData, pos) => {
                    let mut b2 = b.clone();
                    let pin = if pos { Pin::EqNode } else { Pin::NeqNode };
                    let cur = b2.pins.get(v).copied().unwrap_or(Pin::Free);
                    b2.pins.insert(*v, merge_pin(cur, pin));
                    next.push(b2);
                }
                (Reg::Node, TestKind::Down { test, mode }, true) => {
                    // Only path at a leaf is the node itself.
                    match mode {
                        DownMode::Neq => {} // D(x) != D(x): contradiction
                        _ => {
                            let mut b2 = b.clone();
                            b2.local.push(letter_fact(work, *test, true));
                            next.push(b2);
                        }
                    }
                }
                (Reg::Node, TestKind::Down { test, mode }, false) => match mode {
                    DownMode::Neq => next.push(b.clone()), // inner conj false: negation holds
                    _ => {
                        let mut b2 = b.clone();
                        b2.local.push(letter_fact(work, *test, false));
                        next.push(b2);
                    }
                },
                (Reg::Var(v), TestKind::Down { test, mode }, true) => {
                    let mut b2 = b.clone();
                    b2.local.push(letter_fact(work, *test, true));
                    let pin = match mode {
                        DownMode::Eq => Pin::EqNode,
                        DownMode::Neq => Pin::NeqNode,
                        DownMode::Any => Pin::Free,
                    };
                    let cur = b2.pins.get(v).copied().unwrap_or(Pin::Free);
                    b2.pins.insert(*v, merge_pin(cur, pin));
                    next.push(b2);
                }
                (Reg::Var(v), TestKind::Down { test, mode }, false) => {
                    // not(letter in class and relation): one branch per part.
                    let mut b_letter = b.clone();
                    b_letter.local.push(letter_fact(work, *test, false));
                    next.push(b_letter);
                    match mode {
                        DownMode::Any => {}
                        _ => {
                            let mut b_rel = b.clone();
                            let pin = match mode {
                                DownMode::Eq => Pin::NeqNode,
                                DownMode::Neq => Pin::EqNode,
                                DownMode::Any => unreachable!(),
                            };
                            let cur = b_rel.pins.get(v).copied().unwrap_or(Pin::Free);
                            b_rel.pins.insert(*v, merge_pin(cur, pin));
                            next.push(b_rel);
                        }
                    }
                }
                _ => next.push(b.clone()),
            }
        }
        branches = next;
    }

    // A symbolic value only matters where a register-reading state receives
    // it; emissions into insensitive states can ride any register.
    let var_read = |v: usize| -> bool {
        o.reg_tests.iter().any(|(r, _)| *r == Reg::Var(v))
            || o.emits.iter().any(
                |e| matches!(e, Emit::WithReg(a, Reg::Var(x)) if *x == v && sens[a.target().unwrap() as usize]),
            )
    };

    let mut all_ok = true;
    'branches: for b in branches {
        if b.pins.values().any(|p| matches!(p, Pin::Dead)) {
            continue 'branches;
        }
        let init_used_by_emits = o
            .emits
            .iter()
            .any(|e| matches!(e, Emit::WithReg(a, Reg::Init) if sens[a.target().unwrap() as usize]));
        let init_free = !init_used_by_emits && b.init_tests.is_empty();
        let mut init_taken = false;
        let mut carrier: BTreeMap<usize, Reg> = BTreeMap::new();
        let mut init_pin: Option<Pin> = None;
        for v in 0..o.n_vars {
            if !var_read(v) {
                // Value never read: share the initial register.
                carrier.insert(v, Reg::Init);
                continue;
            }
            let pin = b.pins.get(&v).copied().unwrap_or(Pin::Free);
            let n_emits = o
                .emits
                .iter()
                .filter(|e| {
                    matches!(e, Emit::WithReg(a, Reg::Var(x)) if *x == v && sens[a.target().unwrap() as usize])
                })
                .count();
            match pin {
                Pin::EqNode => {
                    carrier.insert(v, Reg::Node);
                }
                Pin::Free if n_emits <= 1 => {
                    carrier.insert(v, Reg::Var(v));
                }
                Pin::Free | Pin::NeqNode => {
                    if init_free && !init_taken {
                        init_taken = true;
                        init_pin = Some(pin);
                        carrier.insert(v, Reg::Init);
                    } else {
                        all_ok = false;
                        continue 'branches;
                    }
                }
                Pin::Dead => continue 'branches,
            }
        }

        let mut test: Vec<BasicTest> = b.local.clone();
        test.push(BasicTest::pos(TestKind::State(work.initial)));
        test.extend(b.init_tests.iter().cloned());
        if needs_leaf {
            test.push(BasicTest::pos(TestKind::Leaf));
        }
        if init_pin == Some(Pin::NeqNode) {
            test.push(BasicTest::neg(TestKind::EqData));
        }
        let mut action: Vec<BasicAction> = Vec::new();
        for e in &o.emits {
            match e {
                Emit::PlainGuess(p) => action.push(BasicAction::Guess(*p)),
                Emit::PlainUniv(p) => action.push(BasicAction::Univ(*p)),
                Emit::WithReg(a, reg) => {
                    let p = a.target().unwrap();
                    let resolved = match reg {
                        Reg::Init => Reg::Init,
                        Reg::Node => Reg::Node,
                        Reg::Var(v) => {
                            if sens[p as usize] {
                                carrier[v]
                            } else {
                                // Reader never looks: any register will do.
                                Reg::Init
                            }
                        }
                    };
                    match resolved {
                        Reg::Init => action.push(BasicAction::Keep(p)),
                        Reg::Node => action.push(BasicAction::Store(p)),
                        Reg::Var(_) => action.push(BasicAction::Guess(p)),
                    }
                }
            }
        }
        if action.is_empty() {
            action.push(BasicAction::Accept);
        }
        out.insert(Transition::new(test, action));
    }
    all_ok
}

fn leaf_closure(work: &mut Work, cap: usize) -> Result<(), AutomatonError> {
    let q0 = work.initial;
    let q0_assoc: Vec<Transition> =
        work.transitions.iter().filter(|t| t.state_test() == Some(q0)).cloned().collect();
    let any_eps = q0_assoc.iter().any(|t| t.action.iter().any(|a| work.is_eps_atom(a)));
    if !any_eps {
        return Ok(());
    }
    let mut outcomes = Vec::new();
    expand_closure(work, true, vec![(q0, Reg::Init)], Outcome::default(), &mut outcomes, cap)?;
    outcomes.sort();
    outcomes.dedup();
    for tr in q0_assoc {
        work.transitions.remove(&tr);
    }
    let sens = register_sensitive(work);
    let mut compiled = BTreeSet::new();
    for o in &outcomes {
        if !compile_outcome(work, o, &sens, &mut compiled) {
            work.lossy = true;
        }
    }
    work.transitions.extend(compiled);
    Ok(())
}

fn has_eps_atoms(work: &Work) -> bool {
    work.transitions.iter().any(|tr| tr.action.iter().any(|a| work.is_eps_atom(a)))
}


/// Drops transitions whose state can never hold a thread.
fn prune_unreachable(work: &mut Work) {
    let mut reach: BTreeSet<StateId> = [work.initial].into_iter().collect();
    loop {
        let mut grew = false;
        for tr in &work.transitions {
            if reach.contains(&work.assoc(tr)) {
                for a in &tr.action {
                    if let Some(p) = a.target() {
                        if !reach.contains(&p) {
                            grew = true;
                        }
                    }
                }
            }
        }
        if !grew {
            break;
        }
        let additions: Vec<StateId> = work
            .transitions
            .iter()
            .filter(|tr| reach.contains(&work.assoc(tr)))
            .flat_map(|tr| tr.action.iter().filter_map(|a| a.target()))
            .collect();
        reach.extend(additions);
    }
    work.transitions.retain(|tr| reach.contains(&tr.state_test().expect("normalized")));
}

/// Language-preserving translation from the stay-action model to the plain
/// model.
pub fn eliminate_epsilon(
    be: &BudaEps,
    opts: &CompileOptions,
) -> Result<EpsElimResult, AutomatonError> {
    // Nothing to do when no action targets a stay state.
    let trivial = !be.aut.transitions().iter().any(|tr| {
        tr.action.iter().any(|a| a.target().is_some_and(|p| be.eps[p as usize]))
    });
    if trivial {
        return Ok(EpsElimResult { aut: be.aut.clone(), lossy_leaf_closure: false });
    }

    let mut work = Work {
        labels: be.aut.labels().to_vec(),
        internals: be.aut.internals().to_vec(),
        states: be.aut.states().to_vec(),
        eps: be.eps.clone(),
        rank: be.rank.clone(),
        initial: be.aut.initial(),
        transitions: be.aut.transitions().iter().cloned().collect(),
        suite: be.aut.suite().clone(),
        lossy: false,
    };
    normalize_state_tests(&mut work);
    univ_elim_pass(&mut work);
    flatten(&mut work, 2_000_000)?;
    leaf_closure(&mut work, 2_000_000)?;
    debug_assert!(!has_eps_atoms(&work), "stay actions must all be eliminated");
    prune_unreachable(&mut work);

    let lossy = work.lossy;
    let aut = Buda::new(
        work.labels,
        work.internals,
        work.states,
        work.initial,
        work.transitions.into_iter().collect(),
        work.suite,
        opts,
    )?;
    Ok(EpsElimResult { aut, lossy_leaf_closure: lossy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::membership::{membership, membership_eps, MemberOptions};
    use crate::automaton::text::parse_buda;
    use crate::oracle;
    use crate::tree::DataTree;

    fn differential(be: &BudaEps, max_nodes: usize, labels: &[&str], max_data: u64) {
        let elim = eliminate_epsilon(be, &CompileOptions::default()).unwrap();
        assert!(!elim.lossy_leaf_closure, "test automata must stay exact");
        for tree in oracle::enumerate_trees(max_nodes, labels, max_data) {
            let lhs = membership_eps(be, &tree, &MemberOptions::default()).unwrap();
            let rhs = membership(&elim.aut, &tree, &MemberOptions::default()).unwrap().accepted;
            assert_eq!(lhs, rhs, "disagreement on {tree}");
        }
    }

    /// keep-chain through a stay state.
    #[test]
    fn eps_keep_chain() {
        let aut = parse_buda(
            concat!(
                "labels: a b\nstates: q0 e1 m\ninitial: q0\ntrans:\n",
                "q0 -> keep(e1)\n",
                "e1 & a -> keep(m)\n",
                "e1 & b -> accept\n",
                "m -> keep(m)\n",
                "m & root -> accept\n",
                "m -> accept\n",
            ),
            &CompileOptions::default(),
        )
        .unwrap();
        let be = BudaEps::new(aut, vec![false, true, false], vec![0, 1, 0]).unwrap();
        differential(&be, 3, &["a", "b"], 2);
    }

    #[test]
    fn eps_store_then_test() {
        // Stay-store the node datum, then require an equal-datum child path.
        let aut = parse_buda(
            concat!(
                "labels: a\nstates: q0 s m\ninitial: q0\ntrans:\n",
                "q0 -> store(s)\n",
                "s & <\"aa\">= -> keep(m)\n",
                "s & leaf -> accept\n",
                "m -> accept\n",
                "m -> keep(m)\n",
            ),
            &CompileOptions::default(),
        )
        .unwrap();
        let be = BudaEps::new(aut, vec![false, true, false], vec![0, 1, 0]).unwrap();
        differential(&be, 3, &["a"], 2);
    }

    #[test]
    fn eps_guess_with_eq_constraint() {
        // Guess a value at the leaf, require it differs from the node datum,
        // carry it up and compare against the root datum.
        let aut = parse_buda(
            concat!(
                "labels: a\nstates: q0 g m\ninitial: q0\ntrans:\n",
                "q0 -> guess(g)\n",
                "g & !eq -> keep(m)\n",
                "m & !root -> keep(m)\n",
                "m & root & eq -> accept\n",
            ),
            &CompileOptions::default(),
        )
        .unwrap();
        let be = BudaEps::new(aut, vec![false, true, false], vec![0, 1, 0]).unwrap();
        differential(&be, 3, &["a"], 3);
    }

    #[test]
    fn eps_univ_spread() {
        // Every datum of the subtree must equal the node's datum somewhere on
        // the way up; tested through a stay-univ at an inner state.
        let aut = parse_buda(
            concat!(
                "labels: a\nstates: q0 u m\ninitial: q0\ntrans:\n",
                "q0 -> keep(m)\n",
                "m & !root -> keep(m)\n",
                "m & root -> univ(u)\n",
                "u & eq -> accept\n",
            ),
            &CompileOptions::default(),
        )
        .unwrap();
        // u is a stay state: univ(u) at the root spawns at the root itself.
        let be = BudaEps::new(aut, vec![false, true, false], vec![0, 1, 0]).unwrap();
        differential(&be, 3, &["a"], 2);
    }

    #[test]
    fn no_eps_states_is_identity() {
        let aut = parse_buda(
            "labels: a\nstates: q0\ninitial: q0\ntrans:\nq0 -> keep(q0)\nq0 -> accept\n",
            &CompileOptions::default(),
        )
        .unwrap();
        let be = BudaEps::from_buda(aut.clone());
        let elim = eliminate_epsilon(&be, &CompileOptions::default()).unwrap();
        assert_eq!(elim.aut.transitions(), aut.transitions());
    }
}
