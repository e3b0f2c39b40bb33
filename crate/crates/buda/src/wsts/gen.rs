//! Random extended configurations and order-respecting shrinking, used by the
//! randomized law suites (reflexivity, transitivity, downward closure,
//! profile preservation, compatibility search).

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{BasicAction, BasicTest, DownMode, StateId, TestKind};
use crate::rng::Rng;
use crate::semigroup::ElemId;

use super::order::OrderWitness;
use super::{Ann, DataVal, ExtConfig};

#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub sigma: usize,
    pub states: usize,
    pub tests: usize,
    pub max_data: u32,
    pub max_threads: usize,
    pub max_gamma: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { sigma: 3, states: 3, tests: 2, max_data: 5, max_threads: 4, max_gamma: 5 }
    }
}

fn random_ann(rng: &mut Rng, p: &GenParams) -> Ann {
    match rng.below(8) {
        0 => Ann::Bot,
        1 => Ann::Top,
        2 => Ann::TopG,
        3 => Ann::Test(BasicTest {
            positive: rng.chance(1, 2),
            kind: TestKind::State(rng.below(p.states) as StateId),
        }),
        4 => Ann::Test(BasicTest { positive: rng.chance(1, 2), kind: TestKind::Root }),
        5 => Ann::Test(BasicTest {
            positive: rng.chance(1, 2),
            kind: TestKind::Down {
                test: rng.below(p.tests) as u32,
                mode: if rng.chance(1, 2) { DownMode::Eq } else { DownMode::Neq },
            },
        }),
        6 => Ann::Act(match rng.below(5) {
            0 => BasicAction::Accept,
            1 => BasicAction::Keep(rng.below(p.states) as StateId),
            2 => BasicAction::Store(rng.below(p.states) as StateId),
            3 => BasicAction::Guess(rng.below(p.states) as StateId),
            _ => BasicAction::Univ(rng.below(p.states) as StateId),
        }),
        _ => Ann::Top,
    }
}

/// A random configuration; no well-formedness of the summary is enforced, so
/// these exercise the order and profile machinery over arbitrary shapes.
pub fn random_config(rng: &mut Rng, p: &GenParams) -> ExtConfig {
    let mut delta = BTreeSet::new();
    for _ in 0..rng.below(p.max_threads + 1) {
        delta.insert((
            rng.below(p.states) as StateId,
            random_ann(rng, p),
            1 + rng.below(p.max_data as usize) as DataVal,
        ));
    }
    let mut gamma = BTreeSet::new();
    for _ in 0..rng.below(p.max_gamma + 1) {
        gamma.insert((
            rng.below(p.sigma) as ElemId,
            1 + rng.below(p.max_data as usize) as DataVal,
        ));
    }
    ExtConfig { delta, gamma, r: rng.chance(1, 2), m: rng.chance(1, 2) }
}

/// Builds a configuration below `theta` in the order: a type-respecting
/// surjection merges data values whose summary rows agree (keeping at least
/// two carriers of any row shared by two values, so the profile is intact)
/// and thread annotations may be dropped. Returns the shrunk configuration
/// with the witnessing map.
pub fn shrink_below(rng: &mut Rng, theta: &ExtConfig) -> (ExtConfig, OrderWitness) {
    let data: Vec<DataVal> = theta.data().into_iter().collect();
    let mut groups: BTreeMap<BTreeSet<ElemId>, Vec<DataVal>> = BTreeMap::new();
    for &d in &data {
        groups.entry(theta.gamma_row(d)).or_default().push(d);
    }
    // f maps theta's data into the kept representatives (None = sink).
    let mut f: BTreeMap<DataVal, Option<DataVal>> = BTreeMap::new();
    for (row, members) in &groups {
        if row.is_empty() {
            // The empty row is never counted: merge or drop freely, keeping
            // at least nothing.
            for &d in members {
                match rng.below(3) {
                    0 => {
                        f.insert(d, None);
                    }
                    1 => {
                        f.insert(d, Some(members[0]));
                    }
                    _ => {
                        f.insert(d, Some(d));
                    }
                }
            }
        } else {
            // Keep the first min(|members|, 2) values; the rest may merge
            // into a kept one.
            let kept = members.len().min(2);
            for (i, &d) in members.iter().enumerate() {
                if i < kept {
                    f.insert(d, Some(d));
                } else if rng.chance(2, 3) {
                    f.insert(d, Some(members[rng.below(kept)]));
                } else {
                    f.insert(d, Some(d));
                }
            }
        }
    }
    // Shrunk rows: intersection of the preimages' thread rows, minus random
    // drops; summary rows are forced equal by the grouping.
    let mut delta = BTreeSet::new();
    let mut gamma = BTreeSet::new();
    for &d in &data {
        if let Some(target) = f[&d] {
            for mu in theta.gamma_row(d) {
                gamma.insert((mu, target));
            }
        }
    }
    let image: BTreeSet<DataVal> = f.values().filter_map(|v| *v).collect();
    for &t in &image {
        // Intersection over all preimages of t.
        let mut row: Option<BTreeSet<(StateId, Ann)>> = None;
        for &d in &data {
            if f[&d] == Some(t) {
                let r = theta.delta_row(d);
                row = Some(match row {
                    None => r,
                    Some(acc) => acc.intersection(&r).cloned().collect(),
                });
            }
        }
        for (q, a) in row.unwrap_or_default() {
            if rng.chance(4, 5) {
                delta.insert((q, a, t));
            }
        }
    }
    let shrunk = ExtConfig { delta, gamma, r: theta.r, m: theta.m };
    (shrunk, OrderWitness { f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wsts::order::{precedes, verify_witness};

    #[test]
    fn shrink_is_below() {
        let mut rng = Rng::new(11);
        let p = GenParams::default();
        let mut produced = 0;
        for _ in 0..300 {
            let theta = random_config(&mut rng, &p);
            let (small, w) = shrink_below(&mut rng, &theta);
            assert!(
                verify_witness(&small, &theta, &w),
                "witness failed:\nsmall {small}\nbig   {theta}"
            );
            assert!(precedes(&small, &theta).is_some());
            produced += 1;
        }
        assert_eq!(produced, 300);
    }
}
