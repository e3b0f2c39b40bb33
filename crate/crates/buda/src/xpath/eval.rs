//! Direct evaluation of node and path expressions over a data tree: the
//! semantic reference every compiled artifact is tested against.

use std::collections::BTreeSet;

use crate::tree::{DataTree, Position};

use super::{NodeExpr, PathExpr};

pub type PosSet = BTreeSet<Position>;
pub type PosRel = BTreeSet<(Position, Position)>;

/// The position set of a node expression.
pub fn eval(tree: &DataTree, e: &NodeExpr) -> PosSet {
    match e {
        NodeExpr::True => tree.positions().cloned().collect(),
        NodeExpr::Label(a) => tree
            .positions()
            .filter(|p| tree.node(p).unwrap().label == *a)
            .cloned()
            .collect(),
        NodeExpr::Not(f) => {
            let inner = eval(tree, f);
            tree.positions().filter(|p| !inner.contains(*p)).cloned().collect()
        }
        NodeExpr::And(a, b) => {
            let ea = eval(tree, a);
            let eb = eval(tree, b);
            ea.intersection(&eb).cloned().collect()
        }
        NodeExpr::Or(a, b) => {
            let mut ea = eval(tree, a);
            ea.extend(eval(tree, b));
            ea
        }
        NodeExpr::Some(p) => eval_path(tree, p).into_iter().map(|(x, _)| x).collect(),
        NodeExpr::Eq(a, b) | NodeExpr::Neq(a, b) => {
            let ra = eval_path(tree, a);
            let rb = eval_path(tree, b);
            let want_eq = matches!(e, NodeExpr::Eq(..));
            let mut out = PosSet::new();
            for (x, y) in &ra {
                if out.contains(x) {
                    continue;
                }
                let dy = tree.node(y).unwrap().datum;
                let hit = rb.iter().any(|(x2, z)| {
                    x2 == x && {
                        let dz = tree.node(z).unwrap().datum;
                        (dy == dz) == want_eq
                    }
                });
                if hit {
                    out.insert(x.clone());
                }
            }
            out
        }
    }
}

/// The binary relation of a path expression.
pub fn eval_path(tree: &DataTree, p: &PathExpr) -> PosRel {
    match p {
        PathExpr::SelfStep => tree.positions().map(|x| (x.clone(), x.clone())).collect(),
        PathExpr::Down => tree
            .positions()
            .flat_map(|x| tree.children(x).map(move |c| (x.clone(), c)))
            .collect(),
        PathExpr::Up => tree
            .positions()
            .filter_map(|x| x.parent().map(|p| (x.clone(), p)))
            .collect(),
        PathExpr::Filter(f) => eval(tree, f).into_iter().map(|x| (x.clone(), x)).collect(),
        PathExpr::Seq(a, b) => {
            let ra = eval_path(tree, a);
            let rb = eval_path(tree, b);
            let mut out = PosRel::new();
            for (x, y) in &ra {
                for (y2, z) in &rb {
                    if y == y2 {
                        out.insert((x.clone(), z.clone()));
                    }
                }
            }
            out
        }
        PathExpr::Union(a, b) => {
            let mut r = eval_path(tree, a);
            r.extend(eval_path(tree, b));
            r
        }
        PathExpr::Star(a) => {
            // Reflexive-transitive closure.
            let base = eval_path(tree, a);
            let mut r: PosRel = tree.positions().map(|x| (x.clone(), x.clone())).collect();
            loop {
                let mut grew = false;
                let snapshot: Vec<(Position, Position)> = r.iter().cloned().collect();
                for (x, y) in &snapshot {
                    for (y2, z) in &base {
                        if y == y2 && r.insert((x.clone(), z.clone())) {
                            grew = true;
                        }
                    }
                }
                if !grew {
                    return r;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xpath::parser::parse_node_expr;

    fn positions(tree: &str, query: &str) -> Vec<String> {
        let t = DataTree::parse(tree).unwrap();
        let e = parse_node_expr(query).unwrap();
        eval(&t, &e).into_iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn unequal_children_found_at_root() {
        assert_eq!(positions("a#1(b#1,b#2)", "<down/[b] != down/[b]>"), vec!["ε"]);
    }

    #[test]
    fn no_matching_child() {
        assert!(positions("a#1(b#1)", "<down/[a]>").is_empty());
    }

    #[test]
    fn self_relation_is_identity() {
        assert_eq!(positions("a#1(b#1)", "<self>").len(), 2);
    }

    #[test]
    fn negation_complements() {
        let t = DataTree::parse("a#1(b#2,a#3)").unwrap();
        let pos = eval(&t, &parse_node_expr("a").unwrap());
        let neg = eval(&t, &parse_node_expr("not a").unwrap());
        assert_eq!(pos.len() + neg.len(), t.len());
        assert!(pos.intersection(&neg).next().is_none());
    }

    #[test]
    fn union_is_setwise() {
        let t = DataTree::parse("a#1(b#2(c#3))").unwrap();
        let u = eval_path(&t, &crate::xpath::parser::parse_path_expr("down|up").unwrap());
        let d = eval_path(&t, &crate::xpath::parser::parse_path_expr("down").unwrap());
        let up = eval_path(&t, &crate::xpath::parser::parse_path_expr("up").unwrap());
        assert_eq!(u, d.union(&up).cloned().collect());
    }

    #[test]
    fn star_reaches_descendants_and_self() {
        let t = DataTree::parse("a#1(b#2(c#3))").unwrap();
        let r = eval_path(&t, &crate::xpath::parser::parse_path_expr("down*").unwrap());
        assert_eq!(r.len(), 3 + 2 + 1);
    }

    #[test]
    fn ancestor_equality_example() {
        // A child labeled a with the same datum as a b-ancestor.
        let q = "<down/[a] = up*/[b]>";
        assert_eq!(positions("b#7(c#0(a#7))", q), vec!["1"]);
        assert!(positions("b#7(c#0(a#8))", q).is_empty());
    }
}
