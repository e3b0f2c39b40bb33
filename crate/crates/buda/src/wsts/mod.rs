//! The transition system over extended configurations and its well-quasi-order,
//! used to decide emptiness by coverability.
//!
//! An extended configuration abstracts a run over one subtree: the live
//! threads annotated with the test or action they still owe, the summary of
//! downward paths (semigroup image, endpoint datum), a root flag and a merge
//! flag. Data values are kept canonical (1..n) after every step; equivalence
//! up to data bijection is exactly equality of canonical forms, because a
//! configuration is determined by the multiset of per-value rows.

pub mod emptiness;
pub mod gen;
pub mod order;
pub mod succ;
pub mod trace;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::automaton::{BasicAction, BasicTest, Buda, DownMode, StateId, TestKind};
use crate::semigroup::{ElemId, Tag};

pub type DataVal = u32;

/// What a thread still owes: nothing yet (`Bot`), a pending test or action,
/// or readiness to move up (`Top`, guessed-register variant `TopG`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ann {
    Bot,
    Top,
    TopG,
    Test(BasicTest),
    Act(BasicAction),
}

impl fmt::Display for Ann {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ann::Bot => write!(f, "⊥"),
            Ann::Top => write!(f, "⊤"),
            Ann::TopG => write!(f, "⊤g"),
            Ann::Test(t) => {
                let neg = if t.positive { "" } else { "!" };
                match &t.kind {
                    TestKind::State(q) => write!(f, "{neg}q{q}"),
                    TestKind::Root => write!(f, "{neg}root"),
                    TestKind::Leaf => write!(f, "{neg}leaf"),
                    TestKind::EqData => write!(f, "{neg}eq"),
                    TestKind::Label(a) => write!(f, "{neg}l{a}"),
                    TestKind::Internal(b) => write!(f, "{neg}b{b}"),
                    TestKind::InternalIn(_) => write!(f, "{neg}bset"),
                    TestKind::Down { test, mode } => {
                        let m = match mode {
                            DownMode::Eq => "=",
                            DownMode::Neq => "!=",
                            DownMode::Any => "",
                        };
                        write!(f, "{neg}<t{test}>{m}")
                    }
                }
            }
            Ann::Act(a) => match a {
                BasicAction::Accept => write!(f, "acc"),
                BasicAction::Keep(p) => write!(f, "keep(q{p})"),
                BasicAction::Store(p) => write!(f, "store(q{p})"),
                BasicAction::Guess(p) => write!(f, "guess(q{p})"),
                BasicAction::Univ(p) => write!(f, "univ(q{p})"),
            },
        }
    }
}

/// Extended configuration `(Δ, Γ, r, m)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExtConfig {
    pub delta: BTreeSet<(StateId, Ann, DataVal)>,
    pub gamma: BTreeSet<(ElemId, DataVal)>,
    pub r: bool,
    pub m: bool,
}

impl ExtConfig {
    pub fn data(&self) -> BTreeSet<DataVal> {
        self.delta
            .iter()
            .map(|(_, _, d)| *d)
            .chain(self.gamma.iter().map(|(_, d)| *d))
            .collect()
    }

    pub fn delta_row(&self, d: DataVal) -> BTreeSet<(StateId, Ann)> {
        self.delta
            .iter()
            .filter(|(_, _, x)| *x == d)
            .map(|(q, a, _)| (*q, a.clone()))
            .collect()
    }

    pub fn gamma_row(&self, d: DataVal) -> BTreeSet<ElemId> {
        self.gamma.iter().filter(|(_, x)| *x == d).map(|(mu, _)| *mu).collect()
    }

    pub fn is_accepting(&self) -> bool {
        self.delta.is_empty()
    }

    /// The unique one-letter summary pair, when the configuration is
    /// well-formed: it fixes the label and datum of the abstracted root.
    pub fn star_pair(&self, aut: &Buda) -> Option<(ElemId, DataVal)> {
        let mut found = None;
        for (mu, d) in &self.gamma {
            if matches!(aut.rec().tag(*mu), Tag::Letter(_)) {
                if found.is_some() {
                    return None;
                }
                found = Some((*mu, *d));
            }
        }
        found
    }

    pub fn is_initial(&self, aut: &Buda) -> bool {
        self.gamma.len() == 1
            && self.star_pair(aut).is_some()
            && self.delta.len() == 1
            && self.delta.iter().all(|(q, a, _)| *q == aut.initial() && *a == Ann::Bot)
    }

    /// Renames data values to 1..n, ordering them by their full row type.
    /// Two configurations are identical up to a data bijection exactly when
    /// their canonical forms are equal.
    pub fn canonical(&self) -> ExtConfig {
        let mut keyed: Vec<(BTreeSet<(StateId, Ann)>, BTreeSet<ElemId>, DataVal)> = self
            .data()
            .into_iter()
            .map(|d| (self.delta_row(d), self.gamma_row(d), d))
            .collect();
        keyed.sort();
        let rename: BTreeMap<DataVal, DataVal> = keyed
            .iter()
            .enumerate()
            .map(|(i, (_, _, d))| (*d, (i + 1) as DataVal))
            .collect();
        ExtConfig {
            delta: self
                .delta
                .iter()
                .map(|(q, a, d)| (*q, a.clone(), rename[d]))
                .collect(),
            gamma: self.gamma.iter().map(|(mu, d)| (*mu, rename[d])).collect(),
            r: self.r,
            m: self.m,
        }
    }

    pub fn fresh_value(&self) -> DataVal {
        self.data().iter().max().copied().unwrap_or(0) + 1
    }
}

impl fmt::Display for ExtConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Δ{{")?;
        for (i, (q, a, d)) in self.delta.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "(q{q},{a},{d})")?;
        }
        write!(f, "}} Γ{{")?;
        for (i, (mu, d)) in self.gamma.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "(#{mu},{d})")?;
        }
        write!(f, "}} r={} m={}", self.r as u8, self.m as u8)
    }
}

/// Counting abstraction behind the well-quasi-order: which nonempty summary
/// rows are realized by exactly one datum, which by at least two, plus the
/// two flags. (The empty row is excluded: infinitely many absent data values
/// realize it.)
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub classes: BTreeMap<BTreeSet<ElemId>, u8>,
    pub r: bool,
    pub m: bool,
}

pub fn profile(theta: &ExtConfig) -> Profile {
    let mut classes: BTreeMap<BTreeSet<ElemId>, u8> = BTreeMap::new();
    for d in theta.data() {
        let row = theta.gamma_row(d);
        if row.is_empty() {
            continue;
        }
        let e = classes.entry(row).or_insert(0);
        *e = (*e + 1).min(2);
    }
    Profile { classes, r: theta.r, m: theta.m }
}

impl Profile {
    /// Materializes the explicit "realized by zero" / "realized by one" sets
    /// over all nonempty subsets of a semigroup of the given size. Intended
    /// for small semigroups in tests.
    pub fn materialize(&self, sigma: usize) -> (BTreeSet<BTreeSet<ElemId>>, BTreeSet<BTreeSet<ElemId>>) {
        assert!(sigma <= 16, "materialization is for small semigroups");
        let mut a0 = BTreeSet::new();
        let mut a1 = BTreeSet::new();
        for mask in 1u32..(1 << sigma) {
            let set: BTreeSet<ElemId> = (0..sigma as u32).filter(|i| mask & (1 << i) != 0).collect();
            match self.classes.get(&set) {
                None => {
                    a0.insert(set);
                }
                Some(1) => {
                    a1.insert(set);
                }
                Some(_) => {}
            }
        }
        (a0, a1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(delta: &[(StateId, Ann, DataVal)], gamma: &[(ElemId, DataVal)], r: bool, m: bool) -> ExtConfig {
        ExtConfig {
            delta: delta.iter().cloned().collect(),
            gamma: gamma.iter().cloned().collect(),
            r,
            m,
        }
    }

    #[test]
    fn profile_counts_single_and_absent_rows() {
        // One datum with row {0}; semigroup {0 = letter, 1 = long}.
        let theta = cfg(&[(0, Ann::Bot, 1)], &[(0, 1)], false, false);
        let p = profile(&theta);
        let (a0, a1) = p.materialize(2);
        let row0: BTreeSet<ElemId> = [0].into_iter().collect();
        let row1: BTreeSet<ElemId> = [1].into_iter().collect();
        let row01: BTreeSet<ElemId> = [0, 1].into_iter().collect();
        assert!(a1.contains(&row0));
        assert!(a0.contains(&row1));
        assert!(a0.contains(&row01));
        assert_eq!(a1.len(), 1);
    }

    #[test]
    fn profile_drops_rows_seen_twice() {
        let theta = cfg(&[], &[(0, 1), (0, 2)], false, false);
        let p = profile(&theta);
        let (a0, a1) = p.materialize(2);
        let row0: BTreeSet<ElemId> = [0].into_iter().collect();
        assert!(!a0.contains(&row0));
        assert!(!a1.contains(&row0));
    }

    #[test]
    fn profile_is_bijection_invariant() {
        let t1 = cfg(&[(0, Ann::Top, 7)], &[(0, 7), (1, 3)], true, false);
        let t2 = cfg(&[(0, Ann::Top, 1)], &[(0, 1), (1, 9)], true, false);
        assert_eq!(profile(&t1), profile(&t2));
    }

    #[test]
    fn canonical_renames_by_row_type() {
        let t1 = cfg(&[(0, Ann::Bot, 7)], &[(0, 7)], false, false);
        let c = t1.canonical();
        assert_eq!(c.data().into_iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn canonical_equates_bijective_variants() {
        let t1 = cfg(&[(0, Ann::Bot, 1), (1, Ann::Top, 2)], &[(0, 1), (1, 2)], false, false);
        let t2 = cfg(&[(0, Ann::Bot, 9), (1, Ann::Top, 4)], &[(0, 9), (1, 4)], false, false);
        assert_eq!(t1.canonical(), t2.canonical());
    }

    #[test]
    fn canonical_agrees_with_bijection_enumeration() {
        // Exhaustive check on tiny configurations: canonical equality iff
        // some bijection maps one onto the other.
        let configs: Vec<ExtConfig> = vec![
            cfg(&[(0, Ann::Bot, 1)], &[(0, 1)], false, false),
            cfg(&[(0, Ann::Bot, 2)], &[(0, 2)], false, false),
            cfg(&[(0, Ann::Bot, 1)], &[(0, 2)], false, false),
            cfg(&[(0, Ann::Bot, 1), (0, Ann::Bot, 2)], &[(0, 1), (1, 2)], false, false),
            cfg(&[(0, Ann::Bot, 2), (0, Ann::Bot, 1)], &[(0, 2), (1, 1)], false, false),
            cfg(&[(0, Ann::Top, 1)], &[(0, 1), (1, 2), (1, 3)], true, false),
            cfg(&[(0, Ann::Top, 3)], &[(0, 3), (1, 1), (1, 2)], true, false),
        ];
        for a in &configs {
            for b in &configs {
                let canon_eq = a.canonical() == b.canonical();
                let bij_eq = equivalent_by_bijection(a, b);
                assert_eq!(canon_eq, bij_eq, "{a} vs {b}");
            }
        }
    }

    fn equivalent_by_bijection(a: &ExtConfig, b: &ExtConfig) -> bool {
        let da: Vec<DataVal> = a.data().into_iter().collect();
        let db: Vec<DataVal> = b.data().into_iter().collect();
        if da.len() != db.len() || a.r != b.r || a.m != b.m {
            return false;
        }
        fn perms(v: &[DataVal]) -> Vec<Vec<DataVal>> {
            if v.is_empty() {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for i in 0..v.len() {
                let mut rest = v.to_vec();
                let x = rest.remove(i);
                for mut p in perms(&rest) {
                    p.insert(0, x);
                    out.push(p);
                }
            }
            out
        }
        for p in perms(&db) {
            let map: BTreeMap<DataVal, DataVal> = da.iter().copied().zip(p).collect();
            let image = ExtConfig {
                delta: a.delta.iter().map(|(q, an, d)| (*q, an.clone(), map[d])).collect(),
                gamma: a.gamma.iter().map(|(mu, d)| (*mu, map[d])).collect(),
                r: a.r,
                m: a.m,
            };
            if image == *b {
                return true;
            }
        }
        false
    }
}
