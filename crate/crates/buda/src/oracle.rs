//! Brute-force reference machinery: exhaustive tree enumeration and naive
//! satisfiability search. These anchor the differential tests of every other
//! module, so they stay deliberately simple.

use std::collections::BTreeMap;

use crate::tree::{DataTree, DataValue, NodeData, Position};

/// Ordered unranked tree shapes with exactly `n` nodes. A shape lists each
/// node's child count in preorder.
fn shapes(n: usize) -> Vec<Vec<usize>> {
    fn forests(m: usize) -> Vec<Vec<Vec<usize>>> {
        // All ordered sequences of shapes whose sizes sum to m.
        if m == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first_size in 1..=m {
            for first in shapes(first_size) {
                for rest in forests(m - first_size) {
                    let mut v = vec![first.clone()];
                    v.extend(rest.iter().cloned());
                    out.push(v);
                }
            }
        }
        out
    }
    if n == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    for forest in forests(n - 1) {
        let mut shape = vec![forest.len()];
        for sub in forest {
            shape.extend(sub);
        }
        out.push(shape);
    }
    out
}

/// Positions of a shape in preorder.
fn positions_of_shape(shape: &[usize]) -> Vec<Position> {
    let mut out = Vec::new();
    let mut idx = 0;
    fn go(shape: &[usize], idx: &mut usize, at: Position, out: &mut Vec<Position>) {
        let k = shape[*idx];
        *idx += 1;
        out.push(at.clone());
        for i in 1..=k {
            go(shape, idx, at.child(i as u32), out);
        }
    }
    go(shape, &mut idx, Position::root(), &mut out);
    out
}

/// Every tree with at most `max_nodes` nodes over the label set, with data
/// assignments canonical up to bijection (first occurrence gets 1, the next
/// new value 2, and so on, never exceeding `max_data` distinct values). Each
/// tree is produced exactly once, in a deterministic order.
pub fn enumerate_trees(max_nodes: usize, labels: &[&str], max_data: u64) -> Vec<DataTree> {
    let mut out = Vec::new();
    for n in 1..=max_nodes {
        for shape in shapes(n) {
            let poss = positions_of_shape(&shape);
            let mut labelings: Vec<Vec<usize>> = vec![vec![]];
            for _ in 0..n {
                let mut next = Vec::new();
                for base in &labelings {
                    for l in 0..labels.len() {
                        let mut v = base.clone();
                        v.push(l);
                        next.push(v);
                    }
                }
                labelings = next;
            }
            let mut datas: Vec<Vec<u64>> = vec![vec![]];
            for _ in 0..n {
                let mut next = Vec::new();
                for base in &datas {
                    let top = base.iter().copied().max().unwrap_or(0);
                    let hi = (top + 1).min(max_data);
                    for d in 1..=hi {
                        let mut v = base.clone();
                        v.push(d);
                        next.push(v);
                    }
                }
                datas = next;
            }
            for labeling in &labelings {
                for data in &datas {
                    let mut nodes = BTreeMap::new();
                    for (i, pos) in poss.iter().enumerate() {
                        nodes.insert(
                            pos.clone(),
                            NodeData {
                                label: labels[labeling[i]].to_string(),
                                datum: DataValue(data[i]),
                                internal: None,
                            },
                        );
                    }
                    out.push(DataTree::new(nodes).expect("generated shape is valid"));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_closed_forms() {
        assert_eq!(enumerate_trees(1, &["a"], 1).len(), 1);
        assert_eq!(enumerate_trees(2, &["a"], 1).len(), 2);
        // Shapes up to 3 nodes: single, chain-2, chain-3, root with two kids.
        assert_eq!(enumerate_trees(3, &["a"], 1).len(), 4);
    }

    #[test]
    fn data_assignments_are_canonical() {
        let trees = enumerate_trees(2, &["a"], 3);
        // 1 one-node tree + chain-2 with data (1,1) and (1,2).
        assert_eq!(trees.len(), 3);
        for t in &trees {
            let first = t.node(&Position::root()).unwrap().datum;
            assert_eq!(first, DataValue(1));
        }
    }

    #[test]
    fn no_duplicates() {
        let trees = enumerate_trees(4, &["a", "b"], 2);
        let mut texts: Vec<String> = trees.iter().map(|t| t.to_string()).collect();
        let n = texts.len();
        texts.sort();
        texts.dedup();
        assert_eq!(n, texts.len());
    }
}
