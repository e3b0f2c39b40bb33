//! The coverability-based emptiness decision procedure.
//!
//! The solver saturates a set of extended configurations starting from the
//! initial ones. Candidate configurations are explored by a closure over
//! macro moves — resolve all pending tests and actions (branching on
//! transition and guess choices, pruning configurations with a permanently
//! pinned thread), widen, grow, merge — recording per-step chains so any
//! accepting configuration yields a replayable derivation. A nonempty answer
//! is always exact. An empty answer is exact when the closure saturated with
//! nothing left to add; when a budget truncated the search the verdict says
//! so, carrying the depth reached. Fresh data values introduced by guess,
//! grow and merge are restricted to one canonical representative, and every
//! configuration is kept canonical, which makes the closure finite whenever
//! the reachable abstraction is.

use std::collections::{BTreeSet, HashMap};

use crate::automaton::{AutomatonError, Buda};

use super::order::precedes;
use super::succ::{statically_dead, succ_eps_thread, succ_grow_live, succ_inc, succ_merge, RuleApp};
use super::trace::{Trace, TraceStep};
use super::{Ann, ExtConfig};

#[derive(Debug, Clone, Copy)]
pub struct DepthPolicy {
    /// Macro rounds per exploration pass.
    pub max_rounds: u64,
    /// Cap on distinct configurations kept per pass.
    pub max_configs: usize,
    /// Cap on rule applications per pass.
    pub max_work: u64,
    /// Outer passes (each restarts exploration after widening the base set).
    pub max_passes: u32,
    /// Seed all four root/merge flag combinations for initial configurations
    /// (the definition fixes neither flag). Off by default: a merge-ready
    /// seed corresponds to no leaf of any run and only feeds endless merge
    /// chains of seed copies; the run simulation starts leaves with the merge
    /// flag down.
    pub initial_all_rm: bool,
}

impl Default for DepthPolicy {
    fn default() -> Self {
        DepthPolicy {
            max_rounds: 24,
            max_configs: 6_000,
            max_work: 500_000,
            max_passes: 48,
            initial_all_rm: false,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Verdict {
    /// An accepting configuration was derived; the trace replays it.
    Nonempty(Trace),
    /// The closure saturated: no accepting configuration is reachable.
    Empty,
    /// The search was truncated by the budget at the stated depth.
    EmptyUpToDepth(u64),
}

fn profile_key(c: &ExtConfig) -> String {
    format!("{:?}", super::profile(c))
}

fn sat_shl(e: usize) -> u64 {
    if e >= 63 {
        u64::MAX
    } else {
        1u64 << e
    }
}

/// Computable step bound under which a covered configuration's successors are
/// themselves covered: the maximum of the single-rule bound and the merge
/// bound (which also pays for per-row widenings on both sides and the data
/// identification).
pub fn compat_bound(sigma: usize, thetas: &[ExtConfig]) -> u64 {
    let p1 = sat_shl(sigma);
    let p2 = sat_shl(2 * sigma);
    let dmax = thetas.iter().map(|t| t.data().len() as u64).max().unwrap_or(0);
    let single = 4u64.saturating_mul(p1).saturating_add(1);
    let merge = 6u64
        .saturating_mul(p1)
        .saturating_add(4u64.saturating_mul(p2))
        .saturating_add(2 * dmax)
        .saturating_add(1);
    single.max(merge)
}

/// Canonical initial configurations: one pending initial thread over a
/// one-letter summary, with the thread's register either the root datum or a
/// different value.
pub fn initial_configs(aut: &Buda, all_rm: bool) -> Vec<ExtConfig> {
    let mut out = Vec::new();
    for c in aut.all_letter_ids() {
        let h = aut.rec().letter_image(c);
        for same in [true, false] {
            for r in [false, true] {
                let ms: &[bool] = if all_rm { &[false, true] } else { &[false] };
                for &m in ms {
                    let thread_val = 1;
                    let root_val = if same { 1 } else { 2 };
                    let cfg = ExtConfig {
                        delta: [(aut.initial(), Ann::Bot, thread_val)].into_iter().collect(),
                        gamma: [(h, root_val)].into_iter().collect(),
                        r,
                        m,
                    };
                    out.push(cfg.canonical());
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

type NodeId = usize;

#[derive(Debug, Clone)]
enum Prov {
    /// Seed with its stored derivation prefix.
    Seed(usize),
    /// Reached from a parent through a chain of single rule steps.
    Chain { parent: NodeId, steps: Vec<(RuleApp, ExtConfig)> },
    Merge { left: NodeId, right: NodeId, app: RuleApp },
}

struct Explorer<'a> {
    aut: &'a Buda,
    nodes: Vec<(ExtConfig, Prov)>,
    index: HashMap<ExtConfig, NodeId>,
    /// Merge-ready configurations, bucketed by root letter and flag, kept as
    /// an antichain: a dominated configuration's merges are covered by its
    /// minorant's widened merges.
    m_true: HashMap<(crate::semigroup::ElemId, bool), Vec<NodeId>>,
    truncated: bool,
    work: u64,
    max_work: u64,
}

impl<'a> Explorer<'a> {
    fn insert(&mut self, cfg: ExtConfig, prov: Prov, cap: usize) -> Option<NodeId> {
        if let Some(&id) = self.index.get(&cfg) {
            return Some(id);
        }
        if self.nodes.len() >= cap {
            self.truncated = true;
            return None;
        }
        let id = self.nodes.len();
        if cfg.m {
            if let Some((mu, _)) = cfg.star_pair(self.aut) {
                let bucket = self.m_true.entry((mu, cfg.r)).or_default();
                let dominated = bucket
                    .iter()
                    .any(|&k| precedes(&self.nodes[k].0, &cfg).is_some());
                if !dominated {
                    bucket.retain(|&k| precedes(&cfg, &self.nodes[k].0).is_none());
                    bucket.push(id);
                }
            }
        }
        self.index.insert(cfg.clone(), id);
        self.nodes.push((cfg, prov));
        Some(id)
    }

    fn spend(&mut self, amount: u64) -> bool {
        self.work += amount;
        if self.work > self.max_work {
            self.truncated = true;
            false
        } else {
            true
        }
    }

    /// Resolves every pending thread of a merge-flag-off configuration,
    /// branching over transition and guess choices. Chains that leave a
    /// thread permanently pinned are dropped: no continuation of them can
    /// ever accept.
    fn quiesce(&mut self, theta: &ExtConfig, cap: usize) -> Vec<Vec<(RuleApp, ExtConfig)>> {
        let mut done: Vec<Vec<(RuleApp, ExtConfig)>> = Vec::new();
        let mut stack: Vec<(ExtConfig, Vec<(RuleApp, ExtConfig)>)> = vec![(theta.clone(), Vec::new())];
        while let Some((cfg, chain)) = stack.pop() {
            if done.len() >= cap || !self.spend(1) {
                self.truncated = true;
                break;
            }
            let pending = cfg
                .delta
                .iter()
                .find(|(_, a, _)| !matches!(a, Ann::Top | Ann::TopG))
                .cloned();
            match pending {
                None => done.push(chain),
                Some(thread) => {
                    let succs = succ_eps_thread(self.aut, &cfg, &thread);
                    if !self.spend(succs.len() as u64) {
                        break;
                    }
                    for (app, next) in succs {
                        let mut c2 = chain.clone();
                        c2.push((app, next.clone()));
                        stack.push((next, c2));
                    }
                }
            }
        }
        done
    }
}

#[derive(Debug)]
enum PassResult {
    Accepting(NodeId),
    Saturated,
    Truncated { rounds: u64 },
}

fn size_key(c: &ExtConfig) -> (usize, usize) {
    (c.data().len(), c.delta.len() + c.gamma.len())
}

/// Smallest-first closure: small configurations abstract small trees, so
/// accepting configurations for small witnesses surface early.
fn explore(ex: &mut Explorer, seeds: usize, policy: &DepthPolicy, bound: u64) -> PassResult {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let cap = policy.max_configs;
    let mut heap: BinaryHeap<Reverse<((usize, usize), NodeId)>> = BinaryHeap::new();
    let mut depth: Vec<u64> = vec![0; seeds];
    for id in 0..seeds {
        if ex.nodes[id].0.is_accepting() {
            return PassResult::Accepting(id);
        }
        heap.push(Reverse((size_key(&ex.nodes[id].0), id)));
    }
    let mut merged_pairs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let rounds_limit = bound.min(policy.max_rounds);
    let mut max_depth = 0u64;

    while let Some(Reverse((_, nid))) = heap.pop() {
        if ex.work > ex.max_work || ex.nodes.len() >= cap {
            ex.truncated = true;
            break;
        }
        if depth[nid] >= rounds_limit {
            ex.truncated = true;
            continue;
        }
        let cfg = ex.nodes[nid].0.clone();
        let d_next = depth[nid] + 1;
        let mut fresh: Vec<NodeId> = Vec::new();
        let mut add =
            |ex: &mut Explorer, depth: &mut Vec<u64>, cfg: ExtConfig, prov: Prov, out: &mut Vec<NodeId>| {
                let existed = ex.index.contains_key(&cfg);
                if let Some(id) = ex.insert(cfg, prov, cap) {
                    if !existed {
                        depth.push(d_next);
                        out.push(id);
                    }
                }
            };

        if !cfg.m {
            let quiescent = cfg.delta.iter().all(|(_, a, _)| matches!(a, Ann::Top | Ann::TopG));
            if !quiescent {
                let chains = ex.quiesce(&cfg, cap);
                for chain in chains {
                    if let Some((_, last)) = chain.last() {
                        let last = last.clone();
                        add(ex, &mut depth, last, Prov::Chain { parent: nid, steps: chain }, &mut fresh);
                    }
                }
            }
            for (app, next) in succ_inc(&cfg) {
                let useful =
                    next.data().len() > cfg.data().len() && next.gamma.len() > cfg.gamma.len();
                if useful && ex.spend(1) {
                    add(
                        ex,
                        &mut depth,
                        next.clone(),
                        Prov::Chain { parent: nid, steps: vec![(app, next)] },
                        &mut fresh,
                    );
                }
            }
            if quiescent {
                let grows = succ_grow_live(ex.aut, &cfg);
                let _ = ex.spend(1 + grows.len() as u64);
                for (app, next) in grows {
                    add(
                        ex,
                        &mut depth,
                        next.clone(),
                        Prov::Chain { parent: nid, steps: vec![(app, next)] },
                        &mut fresh,
                    );
                }
            }
        } else if let Some((mu, _)) = cfg.star_pair(ex.aut) {
            let bucket = ex.m_true.get(&(mu, cfg.r)).cloned().unwrap_or_default();
            for &other in &bucket {
                let key = (nid.min(other), nid.max(other));
                if !merged_pairs.insert(key) {
                    continue;
                }
                let co = ex.nodes[other].0.clone();
                let results = succ_merge(ex.aut, &cfg, &co);
                let _ = ex.spend(1 + results.len() as u64);
                for (app, next) in results {
                    if statically_dead(ex.aut, &next) {
                        continue;
                    }
                    add(
                        ex,
                        &mut depth,
                        next,
                        Prov::Merge { left: nid, right: other, app },
                        &mut fresh,
                    );
                }
            }
        }

        for &id in &fresh {
            max_depth = max_depth.max(depth[id]);
            if ex.nodes[id].0.is_accepting() {
                return PassResult::Accepting(id);
            }
            heap.push(Reverse((size_key(&ex.nodes[id].0), id)));
        }
    }
    if heap.is_empty() && !ex.truncated {
        PassResult::Saturated
    } else {
        PassResult::Truncated { rounds: max_depth.max(1) }
    }
}

fn build_trace(ex: &Explorer, seeds: &[(ExtConfig, Trace)], target: NodeId) -> Trace {
    let mut out = Trace::default();
    let mut memo: HashMap<NodeId, usize> = HashMap::new();
    fn emit(
        ex: &Explorer,
        seeds: &[(ExtConfig, Trace)],
        id: NodeId,
        out: &mut Trace,
        memo: &mut HashMap<NodeId, usize>,
    ) -> usize {
        if let Some(&i) = memo.get(&id) {
            return i;
        }
        let idx = match &ex.nodes[id].1 {
            Prov::Seed(k) => {
                let prefix = &seeds[*k].1;
                let base = out.steps.len();
                for s in &prefix.steps {
                    out.steps.push(TraceStep {
                        rule: s.rule.clone(),
                        sources: s.sources.iter().map(|x| x + base).collect(),
                        config: s.config.clone(),
                    });
                }
                out.steps.len() - 1
            }
            Prov::Chain { parent, steps } => {
                let mut prev = emit(ex, seeds, *parent, out, memo);
                for (rule, cfg) in steps {
                    out.steps.push(TraceStep {
                        rule: Some(rule.clone()),
                        sources: vec![prev],
                        config: cfg.clone(),
                    });
                    prev = out.steps.len() - 1;
                }
                prev
            }
            Prov::Merge { left, right, app } => {
                let l = emit(ex, seeds, *left, out, memo);
                let r = emit(ex, seeds, *right, out, memo);
                out.steps.push(TraceStep {
                    rule: Some(app.clone()),
                    sources: vec![l, r],
                    config: ex.nodes[id].0.clone(),
                });
                out.steps.len() - 1
            }
        };
        memo.insert(id, idx);
        idx
    }
    emit(ex, seeds, target, &mut out, &mut memo);
    out
}

/// Decides emptiness of a normalized automaton.
pub fn emptiness(aut: &Buda, policy: &DepthPolicy) -> Result<Verdict, AutomatonError> {
    if !crate::automaton::normalize::is_normalized(aut) {
        return Err(AutomatonError::Text("emptiness requires a normalized automaton".into()));
    }
    // Base set with stored derivation prefixes.
    let mut base: Vec<(ExtConfig, Trace)> = initial_configs(aut, policy.initial_all_rm)
        .into_iter()
        .map(|c| {
            let tr = Trace {
                steps: vec![TraceStep { rule: None, sources: vec![], config: c.clone() }],
            };
            (c, tr)
        })
        .collect();

    let mut last_rounds = 0u64;
    for _pass in 0..policy.max_passes {
        let sigma = aut.rec().element_count();
        let bound = compat_bound(sigma, &base.iter().map(|(c, _)| c.clone()).collect::<Vec<_>>());
        let mut ex = Explorer {
            aut,
            nodes: Vec::new(),
            index: HashMap::new(),
            m_true: HashMap::new(),
            truncated: false,
            work: 0,
            max_work: policy.max_work,
        };
        for (i, (c, _)) in base.iter().enumerate() {
            ex.insert(c.clone(), Prov::Seed(i), policy.max_configs);
        }
        let seeds = ex.nodes.len();
        let dbg = std::env::var("SOLVER_DEBUG").is_ok();
        let pass_result = explore(&mut ex, seeds, policy, bound);
        if dbg {
            eprintln!(
                "pass {_pass}: seeds={} nodes={} work={} m_true={} truncated={} result={:?}",
                seeds,
                ex.nodes.len(),
                ex.work,
                ex.m_true.values().map(|v| v.len()).sum::<usize>(),
                ex.truncated,
                match &pass_result {
                    PassResult::Accepting(_) => "acc",
                    PassResult::Saturated => "sat",
                    PassResult::Truncated { .. } => "trunc",
                }
            );
        }
        match pass_result {
            PassResult::Accepting(id) => {
                let trace = build_trace(&ex, &base, id);
                debug_assert!(super::trace::replay_trace(aut, &trace));
                return Ok(Verdict::Nonempty(trace));
            }
            PassResult::Saturated => return Ok(Verdict::Empty),
            PassResult::Truncated { rounds } => {
                last_rounds = rounds;
                // Widen the base with configurations no base element covers,
                // smallest first, then deepen from them. Group by profile:
                // only profile-equal configurations can be comparable.
                let mut by_profile: HashMap<String, Vec<usize>> = HashMap::new();
                for (k, (c, _)) in base.iter().enumerate() {
                    by_profile.entry(profile_key(c)).or_default().push(k);
                }
                let mut order: Vec<usize> = (seeds..ex.nodes.len()).collect();
                order.sort_by_key(|&id| {
                    let c = &ex.nodes[id].0;
                    (c.data().len(), c.delta.len(), c.gamma.len())
                });
                let mut added = 0usize;
                for id in order {
                    let cfg = ex.nodes[id].0.clone();
                    let key = profile_key(&cfg);
                    let covered = by_profile
                        .get(&key)
                        .is_some_and(|ks| ks.iter().any(|&k| precedes(&base[k].0, &cfg).is_some()));
                    if covered {
                        continue;
                    }
                    let tr = build_trace(&ex, &base, id);
                    base.push((cfg, tr));
                    by_profile.entry(key).or_default().push(base.len() - 1);
                    added += 1;
                    if added >= 512 {
                        break;
                    }
                }
                if added == 0 {
                    return Ok(Verdict::EmptyUpToDepth(last_rounds));
                }
            }
        }
    }
    Ok(Verdict::EmptyUpToDepth(last_rounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::normalize::normalize;
    use crate::automaton::text::parse_buda;
    use crate::semigroup::CompileOptions;
    use crate::wsts::trace::replay_trace;

    fn solve(src: &str) -> (Verdict, Buda) {
        let aut = parse_buda(src, &CompileOptions::default()).unwrap();
        let n = normalize(&aut, &CompileOptions::default()).unwrap();
        let v = emptiness(&n, &DepthPolicy::default()).unwrap();
        (v, n)
    }

    #[test]
    fn all_automaton_is_nonempty_with_replayable_trace() {
        let (v, aut) = solve(
            "labels: a\nstates: q0\ninitial: q0\ntrans:\nq0 -> keep(q0)\nq0 & root -> accept\n",
        );
        match v {
            Verdict::Nonempty(tr) => assert!(replay_trace(&aut, &tr)),
            other => panic!("expected nonempty, got {other:?}"),
        }
    }

    #[test]
    fn empty_transition_set_is_empty_exactly() {
        // A single transition that can never fire (state test for the wrong
        // state) leaves the initial thread pinned forever.
        let (v, _) = solve(
            "labels: a\nstates: q0 q1\ninitial: q0\ntrans:\nq1 & root -> accept\n",
        );
        match v {
            Verdict::Empty => {}
            other => panic!("expected exact empty, got {other:?}"),
        }
    }

    #[test]
    fn two_distinct_data_needed() {
        // Accept only trees where some child path reaches a datum different
        // from the root's: needs a grow plus a widened or merged summary.
        let (v, aut) = solve(concat!(
            "labels: a\nstates: q0 m\ninitial: q0\ntrans:\n",
            "q0 -> keep(m)\n",
            "q0 & root & <\"aa*\">!= & eq -> accept\n",
            "m & root & <\"aa*\">!= & eq -> accept\n",
            "m -> keep(m)\n",
        ));
        match v {
            Verdict::Nonempty(tr) => {
                assert!(replay_trace(&aut, &tr));
                assert!(tr
                    .steps
                    .iter()
                    .any(|s| s.rule.as_ref().is_some_and(|r| matches!(r.kind, RuleKind::Grow))));
            }
            other => panic!("expected nonempty, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_automaton_stays_empty() {
        // Requires the root to both have and not have an a-child path.
        let (v, _) = solve(concat!(
            "labels: a\nstates: q0\ninitial: q0\ntrans:\n",
            "q0 & root & <\"aa\"> & !(<\"aa\">) -> accept\n",
        ));
        match v {
            Verdict::Empty | Verdict::EmptyUpToDepth(_) => {}
            Verdict::Nonempty(_) => panic!("soundness violation"),
        }
    }

    #[test]
    fn compat_bound_formula() {
        // sigma = 2, max data size 1.
        let theta = ExtConfig {
            delta: [(0, Ann::Bot, 1)].into_iter().collect(),
            gamma: [(0, 1)].into_iter().collect(),
            r: false,
            m: false,
        };
        // single = 4*4+1 = 17; merge = 6*4 + 4*16 + 2*1 + 1 = 91.
        assert_eq!(compat_bound(2, &[theta]), 91);
        // Monotone in data size and always at least the single-rule bound.
        let bigger = ExtConfig {
            delta: [(0, Ann::Bot, 1), (0, Ann::Bot, 2)].into_iter().collect(),
            gamma: [(0, 1)].into_iter().collect(),
            r: false,
            m: false,
        };
        assert!(compat_bound(2, &[bigger]) > 91);
        assert!(compat_bound(2, &[]) >= 17);
        assert_eq!(compat_bound(40, &[]), u64::MAX);
    }
}
