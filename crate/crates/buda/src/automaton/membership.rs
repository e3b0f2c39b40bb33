//! Membership: does the automaton accept a given data tree?
//!
//! The search runs bottom-up over subtrees. For every node it enumerates the
//! internal label together with the reachable pairs (downward-path summary,
//! thread set). The summary set determines every test an ancestor can ask
//! about the subtree, so subtrees never need to be revisited. Thread sets are
//! kept as antichains: a superset of an acceptable thread set only adds
//! obligations, so only minimal sets matter.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use super::{BasicAction, Buda, BudaEps, StateId, Transition};
use crate::semigroup::ElemId;
use crate::tree::{DataTree, DataValue, Position};

#[derive(Debug, Clone, Copy)]
pub struct MemberOptions {
    /// Cap on distinct (summary, thread-set) outcomes kept per node.
    pub max_outcomes: usize,
}

impl Default for MemberOptions {
    fn default() -> Self {
        MemberOptions { max_outcomes: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MemberError {
    #[error("membership search budget exceeded: {0}")]
    Resource(String),
}

/// Replayable description of an accepting run.
#[derive(Debug, Clone, Default)]
pub struct RunWitness {
    pub internal: BTreeMap<Position, String>,
    pub rho: BTreeMap<Position, BTreeSet<(StateId, DataValue)>>,
    /// (position, thread) -> (transition index, guessed values in action order).
    pub choices: BTreeMap<(Position, StateId, DataValue), (usize, Vec<DataValue>)>,
    /// Accepting transition per root thread.
    pub root_choices: BTreeMap<(StateId, DataValue), usize>,
}

#[derive(Debug, Clone)]
pub struct MemberResult {
    pub accepted: bool,
    pub witness: Option<RunWitness>,
}

type Gamma = BTreeSet<(ElemId, DataValue)>;
type Threads = BTreeSet<(StateId, DataValue)>;

/// Facts a test can ask about one node given its subtree summary.
struct NodeFacts<'a> {
    state_dummy: std::marker::PhantomData<&'a ()>,
    label: u32,
    internal: u32,
    is_root: bool,
    is_leaf: bool,
    node_datum: DataValue,
    gamma: &'a Gamma,
}

fn eval_abstract(aut: &Buda, state: StateId, datum: DataValue, tests: &[super::BasicTest], facts: &NodeFacts) -> bool {
    use super::TestKind;
    tests.iter().all(|t| {
        let v = match &t.kind {
            TestKind::State(q) => state == *q,
            TestKind::Label(a) => facts.label == *a,
            TestKind::Internal(b) => facts.internal == *b,
            TestKind::InternalIn(set) => set.contains(&facts.internal),
            TestKind::Root => facts.is_root,
            TestKind::Leaf => facts.is_leaf,
            TestKind::EqData => facts.node_datum == datum,
            TestKind::Down { test, mode } => facts.gamma.iter().any(|(mu, e)| {
                aut.rec().test_accepts_elem(*test, *mu)
                    && match mode {
                        super::DownMode::Eq => *e == datum,
                        super::DownMode::Neq => *e != datum,
                        super::DownMode::Any => true,
                    }
            }),
        };
        v == t.positive
    })
}

/// One way a thread can fire at a node: the threads it sends to the parent
/// plus the bookkeeping needed to replay the choice.
#[derive(Debug, Clone)]
struct FireOutcome {
    moved: Threads,
    transition: usize,
    guesses: Vec<DataValue>,
}

/// All ways the thread `(q, d)` can fire at a node with the given facts.
/// Stay-at-node spawns (when `eps` is given) are chased recursively; their
/// replay bookkeeping is opaque, so witnesses are only built for plain runs.
fn fire(
    aut: &Buda,
    eps: Option<&[bool]>,
    facts: &NodeFacts,
    q: StateId,
    d: DataValue,
    values: &[DataValue],
    memo: &mut HashMap<(StateId, DataValue), Rc<Vec<FireOutcome>>>,
    opts: &MemberOptions,
) -> Result<Rc<Vec<FireOutcome>>, MemberError> {
    if let Some(hit) = memo.get(&(q, d)) {
        return Ok(hit.clone());
    }
    let mut outs: Vec<FireOutcome> = Vec::new();
    for (ti, tr) in aut.transitions().iter().enumerate() {
        if !eval_abstract(aut, q, d, &tr.test, facts) {
            continue;
        }
        // Alternatives per action are folded left to right.
        let mut partial: Vec<(Threads, Vec<DataValue>)> = vec![(BTreeSet::new(), Vec::new())];
        for act in &tr.action {
            let mut next: Vec<(Threads, Vec<DataValue>)> = Vec::new();
            for (moved, guesses) in &partial {
                match act {
                    BasicAction::Accept => next.push((moved.clone(), guesses.clone())),
                    BasicAction::Keep(p) => {
                        extend_with(aut, eps, facts, *p, d, values, memo, opts, moved, guesses, &mut next)?
                    }
                    BasicAction::Store(p) => extend_with(
                        aut, eps, facts, *p, facts.node_datum, values, memo, opts, moved, guesses, &mut next,
                    )?,
                    BasicAction::Guess(p) => {
                        for &e in values {
                            let mut g2 = guesses.clone();
                            g2.push(e);
                            extend_with(aut, eps, facts, *p, e, values, memo, opts, moved, &g2, &mut next)?;
                        }
                    }
                    BasicAction::Univ(p) => {
                        // One target thread per datum in the subtree.
                        let mut alts: Vec<(Threads, Vec<DataValue>)> =
                            vec![(moved.clone(), guesses.clone())];
                        let subtree_data: BTreeSet<DataValue> =
                            facts.gamma.iter().map(|(_, e)| *e).collect();
                        for e in subtree_data {
                            let mut step: Vec<(Threads, Vec<DataValue>)> = Vec::new();
                            for (m, g) in &alts {
                                extend_with(aut, eps, facts, *p, e, values, memo, opts, m, g, &mut step)?;
                            }
                            alts = dedup_pairs(step, opts)?;
                        }
                        next.extend(alts);
                    }
                }
            }
            partial = dedup_pairs(next, opts)?;
        }
        for (moved, guesses) in partial {
            outs.push(FireOutcome { moved, transition: ti, guesses });
        }
    }
    // Antichain on moved-sets: supersets only add obligations.
    let outs = minimal_outcomes(outs);
    let rc = Rc::new(outs);
    memo.insert((q, d), rc.clone());
    Ok(rc)
}

/// Sends a thread `(p, e)` either up (move state) or through a recursive
/// stay-at-node firing (eps state).
#[allow(clippy::too_many_arguments)]
fn extend_with(
    aut: &Buda,
    eps: Option<&[bool]>,
    facts: &NodeFacts,
    p: StateId,
    e: DataValue,
    values: &[DataValue],
    memo: &mut HashMap<(StateId, DataValue), Rc<Vec<FireOutcome>>>,
    opts: &MemberOptions,
    moved: &Threads,
    guesses: &[DataValue],
    out: &mut Vec<(Threads, Vec<DataValue>)>,
) -> Result<(), MemberError> {
    let is_eps = eps.is_some_and(|v| v[p as usize]);
    if is_eps {
        let subs = fire(aut, eps, facts, p, e, values, memo, opts)?;
        for sub in subs.iter() {
            let mut m = moved.clone();
            m.extend(sub.moved.iter().cloned());
            out.push((m, guesses.to_vec()));
        }
    } else {
        let mut m = moved.clone();
        m.insert((p, e));
        out.push((m, guesses.to_vec()));
    }
    Ok(())
}

fn dedup_pairs(
    v: Vec<(Threads, Vec<DataValue>)>,
    opts: &MemberOptions,
) -> Result<Vec<(Threads, Vec<DataValue>)>, MemberError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (m, g) in v {
        if seen.insert((m.clone(), g.clone())) {
            out.push((m, g));
        }
        if out.len() > opts.max_outcomes {
            return Err(MemberError::Resource("per-thread alternative cap".into()));
        }
    }
    Ok(out)
}

fn minimal_outcomes(mut outs: Vec<FireOutcome>) -> Vec<FireOutcome> {
    outs.sort_by_key(|o| o.moved.len());
    let mut keep: Vec<FireOutcome> = Vec::new();
    'outer: for o in outs {
        for k in &keep {
            if k.moved.is_subset(&o.moved) {
                continue 'outer;
            }
        }
        keep.push(o);
    }
    keep
}

/// One reachable abstraction of a subtree: the node's internal label, the
/// downward summary, the threads handed to the parent, and how we got there.
#[derive(Debug, Clone)]
struct SubInfo {
    internal: u32,
    gamma: Rc<Gamma>,
    threads: Threads,
    prov: Prov,
}

#[derive(Debug, Clone)]
enum Prov {
    Leaf { init: DataValue },
    Inner { child_outcome: Vec<usize>, moves: Vec<MoveRec> },
}

#[derive(Debug, Clone)]
struct MoveRec {
    child: usize,
    state: StateId,
    datum: DataValue,
    transition: usize,
    guesses: Vec<DataValue>,
}

struct Search<'a> {
    aut: &'a Buda,
    eps: Option<&'a [bool]>,
    tree: &'a DataTree,
    values: Vec<DataValue>,
    opts: MemberOptions,
    subs: BTreeMap<Position, Vec<SubInfo>>,
}

impl<'a> Search<'a> {
    fn node_label(&self, pos: &Position) -> u32 {
        let n = self.tree.node(pos).unwrap();
        self.aut.label_index(&n.label).expect("tree label within the automaton alphabet")
    }

    fn sub(&mut self, pos: &Position) -> Result<(), MemberError> {
        let children: Vec<Position> = self.tree.children(pos).collect();
        for ch in &children {
            self.sub(ch)?;
        }
        let label = self.node_label(pos);
        let node_datum = self.tree.node(pos).unwrap().datum;
        let n_int = self.aut.internals().len() as u32;

        let mut outcomes: Vec<SubInfo> = Vec::new();
        if children.is_empty() {
            for b in 0..n_int {
                let letter = self.aut.letter_id(label, b);
                let h = self.aut.rec().letter_image(letter);
                let gamma: Gamma = [(h, node_datum)].into_iter().collect();
                for &e in &self.values {
                    outcomes.push(SubInfo {
                        internal: b,
                        gamma: Rc::new(gamma.clone()),
                        threads: [(self.aut.initial(), e)].into_iter().collect(),
                        prov: Prov::Leaf { init: e },
                    });
                }
            }
        } else {
            // Fold children left to right, keeping (summary-union, threads,
            // provenance) alternatives deduplicated at each step.
            let mut acc: Vec<(Gamma, Threads, Vec<usize>, Vec<MoveRec>)> =
                vec![(Gamma::new(), Threads::new(), Vec::new(), Vec::new())];
            for (ci, ch) in children.iter().enumerate() {
                let child_label = self.node_label(ch);
                let child_datum = self.tree.node(ch).unwrap().datum;
                let child_is_leaf = self.tree.is_leaf(ch);
                let child_subs = self.subs.get(ch).unwrap().clone();
                let mut next: Vec<(Gamma, Threads, Vec<usize>, Vec<MoveRec>)> = Vec::new();
                for (oi, o) in child_subs.iter().enumerate() {
                    let facts = NodeFacts {
                        state_dummy: std::marker::PhantomData,
                        label: child_label,
                        internal: o.internal,
                        is_root: false,
                        is_leaf: child_is_leaf,
                        node_datum: child_datum,
                        gamma: &o.gamma,
                    };
                    // All ways this child's thread set can move up.
                    let mut memo = HashMap::new();
                    let mut alts: Vec<(Threads, Vec<MoveRec>)> = vec![(Threads::new(), Vec::new())];
                    let mut dead = false;
                    for &(q, d) in &o.threads {
                        let fires =
                            fire(self.aut, self.eps, &facts, q, d, &self.values, &mut memo, &self.opts)?;
                        if fires.is_empty() {
                            dead = true;
                            break;
                        }
                        let mut step = Vec::new();
                        for (m, recs) in &alts {
                            for fo in fires.iter() {
                                let mut m2 = m.clone();
                                m2.extend(fo.moved.iter().cloned());
                                let mut r2 = recs.clone();
                                r2.push(MoveRec {
                                    child: ci,
                                    state: q,
                                    datum: d,
                                    transition: fo.transition,
                                    guesses: fo.guesses.clone(),
                                });
                                step.push((m2, r2));
                            }
                        }
                        alts = dedup_threadsets(step, &self.opts)?;
                    }
                    if dead {
                        continue;
                    }
                    for (moved, recs) in alts {
                        for (g, t, ois, mrs) in &acc {
                            let mut g2 = g.clone();
                            g2.extend(o.gamma.iter().cloned());
                            let mut t2 = t.clone();
                            t2.extend(moved.iter().cloned());
                            let mut ois2 = ois.clone();
                            ois2.push(oi);
                            let mut mrs2 = mrs.clone();
                            mrs2.extend(recs.iter().cloned());
                            next.push((g2, t2, ois2, mrs2));
                        }
                    }
                }
                // Deduplicate on (summary, threads); provenance keeps the first.
                let mut seen = BTreeSet::new();
                let mut pruned = Vec::new();
                for e in next {
                    if seen.insert((e.0.clone(), e.1.clone())) {
                        pruned.push(e);
                    }
                    if pruned.len() > self.opts.max_outcomes {
                        return Err(MemberError::Resource(format!("outcome cap at {pos}")));
                    }
                }
                acc = pruned;
                if acc.is_empty() {
                    break;
                }
            }

            for b in 0..n_int {
                let letter = self.aut.letter_id(label, b);
                let h = self.aut.rec().letter_image(letter);
                for (g, t, ois, mrs) in &acc {
                    let mut gamma: Gamma = g
                        .iter()
                        .map(|(mu, e)| (self.aut.rec().product(h, *mu), *e))
                        .collect();
                    gamma.insert((h, node_datum));
                    outcomes.push(SubInfo {
                        internal: b,
                        gamma: Rc::new(gamma),
                        threads: t.clone(),
                        prov: Prov::Inner { child_outcome: ois.clone(), moves: mrs.clone() },
                    });
                }
            }
        }

        // Antichain per summary.
        outcomes.sort_by(|a, b| (a.gamma.as_ref(), a.threads.len()).cmp(&(b.gamma.as_ref(), b.threads.len())));
        let mut keep: Vec<SubInfo> = Vec::new();
        'outer: for o in outcomes {
            for k in keep.iter().rev() {
                if k.gamma != o.gamma {
                    break;
                }
                if k.threads.is_subset(&o.threads) {
                    continue 'outer;
                }
            }
            keep.push(o);
            if keep.len() > self.opts.max_outcomes {
                return Err(MemberError::Resource(format!("outcome cap at {pos}")));
            }
        }
        self.subs.insert(pos.clone(), keep);
        Ok(())
    }
}

fn dedup_threadsets(
    v: Vec<(Threads, Vec<MoveRec>)>,
    opts: &MemberOptions,
) -> Result<Vec<(Threads, Vec<MoveRec>)>, MemberError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (m, r) in v {
        if seen.insert(m.clone()) {
            out.push((m, r));
        }
        if out.len() > opts.max_outcomes {
            return Err(MemberError::Resource("thread alternative cap".into()));
        }
    }
    Ok(out)
}

fn run_search(
    aut: &Buda,
    eps: Option<&[bool]>,
    tree: &DataTree,
    opts: &MemberOptions,
) -> Result<Option<RunWitness>, MemberError> {
    let mut values: Vec<DataValue> = tree.data().into_iter().collect();
    let fresh = DataValue(values.iter().map(|d| d.0).max().unwrap_or(0) + 1);
    values.push(fresh);

    let mut search = Search { aut, eps, tree, values, opts: *opts, subs: BTreeMap::new() };
    let root = Position::root();
    search.sub(&root)?;

    let root_label = search.node_label(&root);
    let root_datum = tree.node(&root).unwrap().datum;
    let root_is_leaf = tree.is_leaf(&root);
    let root_subs = search.subs.get(&root).unwrap().clone();
    for (ri, o) in root_subs.iter().enumerate() {
        let facts = NodeFacts {
            state_dummy: std::marker::PhantomData,
            label: root_label,
            internal: o.internal,
            is_root: true,
            is_leaf: root_is_leaf,
            node_datum: root_datum,
            gamma: &o.gamma,
        };
        let mut memo = HashMap::new();
        let mut root_choices = BTreeMap::new();
        let mut ok = true;
        for &(q, d) in &o.threads {
            let fires = fire(aut, eps, &facts, q, d, &search.values, &mut memo, opts)?;
            match fires.iter().find(|f| f.moved.is_empty()) {
                Some(f) => {
                    root_choices.insert((q, d), f.transition);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if eps.is_some() {
                // Stay-at-node firings are not replayable thread by thread.
                return Ok(Some(RunWitness::default()));
            }
            let mut w = RunWitness { root_choices, ..Default::default() };
            rebuild_witness(&search, &root, ri, &mut w);
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn rebuild_witness(search: &Search, pos: &Position, outcome: usize, w: &mut RunWitness) {
    let o = &search.subs.get(pos).unwrap()[outcome];
    w.internal.insert(pos.clone(), search.aut.internals()[o.internal as usize].clone());
    w.rho.insert(pos.clone(), o.threads.clone());
    match &o.prov {
        Prov::Leaf { init } => {
            w.rho.insert(pos.clone(), [(search.aut.initial(), *init)].into_iter().collect());
        }
        Prov::Inner { child_outcome, moves } => {
            let children: Vec<Position> = search.tree.children(pos).collect();
            for (ci, oi) in child_outcome.iter().enumerate() {
                rebuild_witness(search, &children[ci], *oi, w);
            }
            for m in moves {
                w.choices.insert(
                    (children[m.child].clone(), m.state, m.datum),
                    (m.transition, m.guesses.clone()),
                );
            }
        }
    }
}

/// Membership with an accepting-run witness when the answer is yes.
pub fn membership(aut: &Buda, tree: &DataTree, opts: &MemberOptions) -> Result<MemberResult, MemberError> {
    let w = run_search(aut, None, tree, opts)?;
    Ok(MemberResult { accepted: w.is_some(), witness: w })
}

/// Membership for the stay-at-node variant (no witness reconstruction).
pub fn membership_eps(aut: &BudaEps, tree: &DataTree, opts: &MemberOptions) -> Result<bool, MemberError> {
    Ok(run_search(&aut.aut, Some(&aut.eps), tree, opts)?.is_some())
}

/// Checks a witness against the literal run conditions: initial leaf
/// configurations, per-thread transitions whose tests hold and whose action
/// effects appear at the parent, and accept-only discharges at the root.
pub fn check_witness(aut: &Buda, tree: &DataTree, w: &RunWitness) -> bool {
    use super::eval::eval_test;
    let labeled = tree.with_internal(&w.internal);
    let data: BTreeSet<DataValue> = tree.data();
    let _ = data;
    for pos in tree.positions() {
        let rho = match w.rho.get(pos) {
            Some(r) => r,
            None => return false,
        };
        if tree.is_leaf(pos) {
            if rho.len() != 1 || !rho.iter().all(|(q, _)| *q == aut.initial()) {
                return false;
            }
        }
        if pos.is_root() {
            for &(q, d) in rho {
                let ti = match w.root_choices.get(&(q, d)) {
                    Some(&t) => t,
                    None => return false,
                };
                let tr: &Transition = &aut.transitions()[ti];
                if !tr.action.iter().all(|a| matches!(a, BasicAction::Accept)) {
                    return false;
                }
                if !eval_test(aut, &labeled, pos, q, d, &tr.test) {
                    return false;
                }
            }
        } else {
            let parent = pos.parent().unwrap();
            let parent_rho = match w.rho.get(&parent) {
                Some(r) => r,
                None => return false,
            };
            for &(q, d) in rho {
                let (ti, guesses) = match w.choices.get(&(pos.clone(), q, d)) {
                    Some(c) => c,
                    None => return false,
                };
                let tr = &aut.transitions()[*ti];
                if !eval_test(aut, &labeled, pos, q, d, &tr.test) {
                    return false;
                }
                let mut gi = 0;
                for act in &tr.action {
                    let ok = match act {
                        BasicAction::Accept => true,
                        BasicAction::Keep(p) => parent_rho.contains(&(*p, d)),
                        BasicAction::Store(p) => {
                            parent_rho.contains(&(*p, tree.node(pos).unwrap().datum))
                        }
                        BasicAction::Guess(p) => {
                            let e = match guesses.get(gi) {
                                Some(&e) => e,
                                None => return false,
                            };
                            gi += 1;
                            parent_rho.contains(&(*p, e))
                        }
                        BasicAction::Univ(p) => tree
                            .subtree_data(pos)
                            .unwrap()
                            .iter()
                            .all(|&e| parent_rho.contains(&(*p, e))),
                    };
                    if !ok {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::text::parse_buda;
    use crate::semigroup::CompileOptions;

    fn member(aut: &Buda, tree: &str) -> bool {
        let t = DataTree::parse(tree).unwrap();
        membership(aut, &t, &MemberOptions::default()).unwrap().accepted
    }

    /// Accepts every tree: every thread may keep climbing or accept.
    fn all_aut() -> Buda {
        parse_buda(
            "labels: a b\nstates: q0\ninitial: q0\ntrans:\nq0 -> keep(q0)\nq0 -> accept\n",
            &CompileOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn accepts_everything() {
        let aut = all_aut();
        assert!(member(&aut, "a#1"));
        assert!(member(&aut, "a#1(b#2)"));
        assert!(member(&aut, "a#1(b#2,a#3(b#1))"));
    }

    #[test]
    fn root_only_automaton() {
        let aut = parse_buda(
            "labels: a b\nstates: q0\ninitial: q0\ntrans:\nq0 & root -> accept\n",
            &CompileOptions::default(),
        )
        .unwrap();
        assert!(member(&aut, "a#1"));
        // A child thread has no applicable transition to move up.
        assert!(!member(&aut, "a#1(b#2)"));
    }

    #[test]
    fn child_sharing_root_datum() {
        // Accepts iff the root has a child path (a,b0)(a,b0) ending at the
        // root's datum: i.e. root labeled a with an a-child carrying the same
        // datum.
        let aut = parse_buda(
            concat!(
                "labels: a\nstates: q0 q1\ninitial: q0\ntrans:\n",
                "q0 & leaf -> store(q1)\n",
                "q0 & leaf -> keep(q1)\n",
                "q1 & root & <\"aa\">= & eq -> accept\n",
                "q0 & root & <\"aa\">= & eq -> accept\n",
            ),
            &CompileOptions::default(),
        )
        .unwrap();
        assert!(member(&aut, "a#1(a#1)"));
        assert!(!member(&aut, "a#1(a#2)"));
    }

    #[test]
    fn witness_replays() {
        let aut = all_aut();
        let t = DataTree::parse("a#1(b#2,a#2)").unwrap();
        let r = membership(&aut, &t, &MemberOptions::default()).unwrap();
        assert!(r.accepted);
        let w = r.witness.unwrap();
        assert!(check_witness(&aut, &t, &w));
    }

    #[test]
    fn univ_action_spreads_subtree_data() {
        // univ(q1) at the leaf-to-root move: every subtree datum must then
        // match the root datum via eq; accepts single-child chains only when
        // data all agree.
        let aut = parse_buda(
            concat!(
                "labels: a\nstates: q0 q1\ninitial: q0\ntrans:\n",
                "q0 -> univ(q1)\n",
                "q0 & root -> accept\n",
                "q1 & eq -> accept\n",
                "q1 & eq -> univ(q1)\n",
            ),
            &CompileOptions::default(),
        )
        .unwrap();
        assert!(member(&aut, "a#1(a#1)"));
        assert!(!member(&aut, "a#1(a#2)"));
    }

    #[test]
    fn guess_uses_fresh_value() {
        // Accept iff some guessed value differs from every datum in the tree:
        // guess then test the register differs from the root datum and no
        // reachable datum equals it.
        let aut = parse_buda(
            concat!(
                "labels: a\nstates: q0 q1\ninitial: q0\ntrans:\n",
                "q0 & leaf -> guess(q1)\n",
                "q0 & leaf & root -> accept\n",
                "q1 & root & !(<\"a a*\">=) -> accept\n",
            ),
            &CompileOptions::default(),
        )
        .unwrap();
        assert!(member(&aut, "a#1(a#2)"));
    }
}
