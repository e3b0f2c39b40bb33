//! The well-quasi-order on extended configurations.
//!
//! `small ⪯ big` requires equal profiles and a function mapping the big
//! configuration's data onto the small one's such that thread rows shrink
//! (pointwise subset) and summary rows match exactly. Values of the big
//! configuration whose summary row is empty may map outside the small one's
//! data; the witness records that as a sink.

use std::collections::{BTreeMap, BTreeSet};

use super::{profile, DataVal, ExtConfig};

/// Witness for `small ⪯ big`: a map from the big side's data values to the
/// small side's (`None` = some value outside the small side's data). Extended
/// to all other values by the sink, it is the ordering function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderWitness {
    pub f: BTreeMap<DataVal, Option<DataVal>>,
}

impl OrderWitness {
    pub fn identity(theta: &ExtConfig) -> OrderWitness {
        OrderWitness { f: theta.data().into_iter().map(|d| (d, Some(d))).collect() }
    }

    /// `self` then `g`: a witness for transitivity.
    pub fn compose(&self, g: &OrderWitness) -> OrderWitness {
        OrderWitness {
            f: g
                .f
                .iter()
                .map(|(d, v)| (*d, v.and_then(|x| self.f.get(&x).copied().flatten())))
                .collect(),
        }
    }
}

/// Checks the witness conditions directly.
pub fn verify_witness(small: &ExtConfig, big: &ExtConfig, w: &OrderWitness) -> bool {
    if profile(small) != profile(big) {
        return false;
    }
    let big_data = big.data();
    if w.f.keys().cloned().collect::<BTreeSet<_>>() != big_data {
        return false;
    }
    // Surjectivity onto the small side's data.
    let image: BTreeSet<DataVal> = w.f.values().filter_map(|v| *v).collect();
    if !small.data().iter().all(|d| image.contains(d)) {
        return false;
    }
    for (d, v) in &w.f {
        match v {
            Some(x) => {
                if !small.delta_row(*x).is_subset(&big.delta_row(*d)) {
                    return false;
                }
                if small.gamma_row(*x) != big.gamma_row(*d) {
                    return false;
                }
            }
            None => {
                // The sink stands for a value with empty rows on the small
                // side, so the big side's summary row must be empty too.
                if !big.gamma_row(*d).is_empty() {
                    return false;
                }
            }
        }
    }
    true
}

/// Decides `small ⪯ big`, returning a witness when it holds.
pub fn precedes(small: &ExtConfig, big: &ExtConfig) -> Option<OrderWitness> {
    if profile(small) != profile(big) {
        return None;
    }
    let big_data: Vec<DataVal> = big.data().into_iter().collect();
    let small_data: Vec<DataVal> = small.data().into_iter().collect();

    // Candidate images per big-side value.
    let mut cands: Vec<Vec<Option<DataVal>>> = Vec::with_capacity(big_data.len());
    for &d in &big_data {
        let dr = big.delta_row(d);
        let gr = big.gamma_row(d);
        let mut v: Vec<Option<DataVal>> = small_data
            .iter()
            .filter(|&&x| small.gamma_row(x) == gr && small.delta_row(x).is_subset(&dr))
            .map(|&x| Some(x))
            .collect();
        if gr.is_empty() {
            v.push(None);
        }
        if v.is_empty() {
            return None;
        }
        cands.push(v);
    }

    // Backtracking assignment; every small-side value must be covered.
    fn go(
        i: usize,
        big_data: &[DataVal],
        cands: &[Vec<Option<DataVal>>],
        small_data: &[DataVal],
        chosen: &mut Vec<Option<DataVal>>,
        covered: &mut BTreeMap<DataVal, usize>,
    ) -> bool {
        if i == big_data.len() {
            return small_data.iter().all(|d| covered.get(d).copied().unwrap_or(0) > 0);
        }
        // Not enough remaining slots to cover the missing values: prune.
        let missing = small_data.iter().filter(|d| covered.get(d).copied().unwrap_or(0) == 0).count();
        if missing > big_data.len() - i {
            return false;
        }
        for v in &cands[i] {
            chosen.push(*v);
            if let Some(x) = v {
                *covered.entry(*x).or_insert(0) += 1;
            }
            if go(i + 1, big_data, cands, small_data, chosen, covered) {
                return true;
            }
            if let Some(x) = v {
                *covered.get_mut(x).unwrap() -= 1;
            }
            chosen.pop();
        }
        false
    }

    let mut chosen = Vec::new();
    let mut covered = BTreeMap::new();
    if go(0, &big_data, &cands, &small_data, &mut chosen, &mut covered) {
        let w = OrderWitness { f: big_data.iter().copied().zip(chosen).collect() };
        debug_assert!(verify_witness(small, big, &w));
        Some(w)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::StateId;
    use crate::wsts::Ann;

    fn cfg(
        delta: &[(StateId, Ann, DataVal)],
        gamma: &[(crate::semigroup::ElemId, DataVal)],
        r: bool,
        m: bool,
    ) -> ExtConfig {
        ExtConfig { delta: delta.iter().cloned().collect(), gamma: gamma.iter().cloned().collect(), r, m }
    }

    #[test]
    fn reflexive() {
        let t = cfg(&[(0, Ann::Bot, 1)], &[(0, 1), (1, 2)], false, false);
        let w = precedes(&t, &t).expect("reflexivity");
        assert!(verify_witness(&t, &t, &w));
    }

    #[test]
    fn extra_threadless_value_with_empty_summary_row_is_above() {
        let t1 = cfg(&[(0, Ann::Bot, 1)], &[(0, 1)], false, false);
        let t2 = cfg(&[(0, Ann::Bot, 1), (0, Ann::Bot, 2)], &[(0, 1)], false, false);
        // t1 ⪯ t2: map 1->1, 2->sink.
        let w = precedes(&t1, &t2).expect("order holds");
        assert_eq!(w.f[&2], None);
        // And not conversely.
        assert!(precedes(&t2, &t1).is_none());
    }

    #[test]
    fn summary_counts_block_order() {
        // Two values sharing a row vs one value: profiles differ.
        let t1 = cfg(&[], &[(0, 1), (0, 2)], false, false);
        let t2 = cfg(&[], &[(0, 1)], false, false);
        assert!(precedes(&t1, &t2).is_none());
        assert!(precedes(&t2, &t1).is_none());
    }

    #[test]
    fn flags_must_match() {
        let t1 = cfg(&[], &[(0, 1)], false, false);
        let t2 = cfg(&[], &[(0, 1)], true, false);
        assert!(precedes(&t1, &t2).is_none());
    }

    #[test]
    fn thread_rows_shrink_pointwise() {
        let t1 = cfg(&[(0, Ann::Bot, 1)], &[(0, 1)], false, false);
        let t2 = cfg(&[(0, Ann::Bot, 1), (1, Ann::Top, 1)], &[(0, 1)], false, false);
        assert!(precedes(&t1, &t2).is_some());
        assert!(precedes(&t2, &t1).is_none());
    }
}
