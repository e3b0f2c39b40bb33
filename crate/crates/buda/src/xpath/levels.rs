//! Nesting levels of a node expression and the per-level path monoids.
//!
//! Level 0 holds label tests and their boolean combinations; each data test
//! (or bare path test) sits one level above the node expressions used inside
//! its paths. Per level, every tested path is read as a regular expression
//! over the loop alphabet `{up, down, [φ]}` and compiled into one joint
//! deterministic machine, whose transition monoid recognizes all of them at
//! once: a word lies in a path's language exactly when its monoid image sits
//! in that path's accepting set.

use std::collections::{BTreeMap, BTreeSet};

use crate::semigroup::nfa::Nfa;
use crate::semigroup::regex::Regex;

use super::{NodeExpr, PathExpr};

pub type MElem = u16;
pub type FormulaId = usize;
pub type PathId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LevelError {
    #[error("level monoid exceeded the element budget ({0} elements)")]
    MonoidTooBig(usize),
}

/// A finite monoid as a multiplication table; element 0 is the unit.
#[derive(Debug, Clone)]
pub struct Monoid {
    pub n: usize,
    mul_table: Vec<MElem>,
}

impl Monoid {
    pub fn unit(&self) -> MElem {
        0
    }

    pub fn mul(&self, a: MElem, b: MElem) -> MElem {
        self.mul_table[a as usize * self.n + b as usize]
    }

    pub fn mul_all(&self, items: impl IntoIterator<Item = MElem>) -> MElem {
        items.into_iter().fold(self.unit(), |a, b| self.mul(a, b))
    }

    /// The submonoid generated by the given elements.
    pub fn generated(&self, gens: impl IntoIterator<Item = MElem>) -> BTreeSet<MElem> {
        let gens: BTreeSet<MElem> = gens.into_iter().collect();
        let mut out: BTreeSet<MElem> = [self.unit()].into_iter().collect();
        let mut work: Vec<MElem> = out.iter().copied().collect();
        while let Some(x) = work.pop() {
            for &g in &gens {
                for y in [self.mul(x, g), self.mul(g, x)] {
                    if out.insert(y) {
                        work.push(y);
                    }
                }
            }
        }
        out
    }
}

/// Per-level compilation artifacts.
#[derive(Debug, Clone)]
pub struct LevelData {
    pub level: usize,
    /// Formula ids of this level, i.e. nesting level at most `level`.
    pub formulas: Vec<FormulaId>,
    /// Path ids whose node subexpressions all sit at this level or below.
    pub paths: Vec<PathId>,
    pub monoid: Monoid,
    pub g_down: MElem,
    pub g_up: MElem,
    pub g_filter: BTreeMap<FormulaId, MElem>,
    pub accepting: BTreeMap<PathId, BTreeSet<MElem>>,
}

#[derive(Debug, Clone)]
pub struct Levels {
    /// Node subformulas closed under simple negation, indexed.
    pub formulas: Vec<NodeExpr>,
    pub formula_level: Vec<usize>,
    /// Index of each formula's simple negation.
    pub neg_of: Vec<FormulaId>,
    /// Paths that are tested (arguments of path and data tests), indexed.
    pub paths: Vec<PathExpr>,
    pub path_level: Vec<usize>,
    pub levels: Vec<LevelData>,
}

impl Levels {
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn formula_id(&self, e: &NodeExpr) -> Option<FormulaId> {
        self.formulas.iter().position(|f| f == e)
    }

    pub fn path_id(&self, p: &PathExpr) -> Option<PathId> {
        self.paths.iter().position(|q| q == p)
    }
}

fn simple_neg(e: &NodeExpr) -> NodeExpr {
    match e {
        NodeExpr::Not(f) => (**f).clone(),
        other => other.clone().not(),
    }
}

fn collect_formulas(e: &NodeExpr, out: &mut Vec<NodeExpr>) {
    if !out.contains(e) {
        out.push(e.clone());
    }
    let neg = simple_neg(e);
    if !out.contains(&neg) {
        out.push(neg);
    }
    match e {
        NodeExpr::Not(f) => collect_formulas(f, out),
        NodeExpr::And(a, b) | NodeExpr::Or(a, b) => {
            collect_formulas(a, out);
            collect_formulas(b, out);
        }
        NodeExpr::Some(p) => collect_paths_formulas(p, out),
        NodeExpr::Eq(a, b) | NodeExpr::Neq(a, b) => {
            collect_paths_formulas(a, out);
            collect_paths_formulas(b, out);
        }
        NodeExpr::True | NodeExpr::Label(_) => {}
    }
}

fn collect_paths_formulas(p: &PathExpr, out: &mut Vec<NodeExpr>) {
    match p {
        PathExpr::Filter(f) => collect_formulas(f, out),
        PathExpr::Seq(a, b) | PathExpr::Union(a, b) => {
            collect_paths_formulas(a, out);
            collect_paths_formulas(b, out);
        }
        PathExpr::Star(a) => collect_paths_formulas(a, out),
        _ => {}
    }
}

fn collect_tested_paths(e: &NodeExpr, out: &mut Vec<PathExpr>) {
    let mut push = |p: &PathExpr| {
        if !out.iter().any(|q| q == p) {
            out.push(p.clone());
        }
    };
    match e {
        NodeExpr::Some(p) => {
            push(p);
            collect_tested_paths_in_path(p, out);
        }
        NodeExpr::Eq(a, b) | NodeExpr::Neq(a, b) => {
            push(a);
            push(b);
            collect_tested_paths_in_path(a, out);
            collect_tested_paths_in_path(b, out);
        }
        NodeExpr::Not(f) => collect_tested_paths(f, out),
        NodeExpr::And(a, b) | NodeExpr::Or(a, b) => {
            collect_tested_paths(a, out);
            collect_tested_paths(b, out);
        }
        NodeExpr::True | NodeExpr::Label(_) => {}
    }
}

fn collect_tested_paths_in_path(p: &PathExpr, out: &mut Vec<PathExpr>) {
    match p {
        PathExpr::Filter(f) => collect_tested_paths(f, out),
        PathExpr::Seq(a, b) | PathExpr::Union(a, b) => {
            collect_tested_paths_in_path(a, out);
            collect_tested_paths_in_path(b, out);
        }
        PathExpr::Star(a) => collect_tested_paths_in_path(a, out),
        _ => {}
    }
}

fn formula_nesting(e: &NodeExpr) -> usize {
    match e {
        NodeExpr::True | NodeExpr::Label(_) => 0,
        NodeExpr::Not(f) => formula_nesting(f),
        NodeExpr::And(a, b) | NodeExpr::Or(a, b) => formula_nesting(a).max(formula_nesting(b)),
        NodeExpr::Some(p) => path_nesting(p) + 1,
        NodeExpr::Eq(a, b) | NodeExpr::Neq(a, b) => path_nesting(a).max(path_nesting(b)) + 1,
    }
}

fn path_nesting(p: &PathExpr) -> usize {
    match p {
        PathExpr::SelfStep | PathExpr::Down | PathExpr::Up => 0,
        PathExpr::Filter(f) => formula_nesting(f),
        PathExpr::Seq(a, b) | PathExpr::Union(a, b) => path_nesting(a).max(path_nesting(b)),
        PathExpr::Star(a) => path_nesting(a),
    }
}

/// Regex over the indexed loop alphabet of a level: 0 = up, 1 = down,
/// 2+k = the k-th level formula as a filter letter.
fn path_to_regex(p: &PathExpr, filter_index: &BTreeMap<FormulaId, usize>, formulas: &[NodeExpr]) -> Regex<usize> {
    match p {
        PathExpr::SelfStep => Regex::Epsilon,
        PathExpr::Up => Regex::letter(0),
        PathExpr::Down => Regex::letter(1),
        PathExpr::Filter(f) => {
            let fid = formulas.iter().position(|x| x == &**f).expect("filter formula collected");
            Regex::letter(filter_index[&fid])
        }
        PathExpr::Seq(a, b) => Regex::concat(
            path_to_regex(a, filter_index, formulas),
            path_to_regex(b, filter_index, formulas),
        ),
        PathExpr::Union(a, b) => Regex::union(
            path_to_regex(a, filter_index, formulas),
            path_to_regex(b, filter_index, formulas),
        ),
        PathExpr::Star(a) => Regex::star(path_to_regex(a, filter_index, formulas)),
    }
}

const MONOID_CAP: usize = 4_096;

/// Builds the transition monoid of the joint machine for the given paths:
/// the monoid itself, the letter images, the per-element state functions and
/// the per-machine state offsets.
#[allow(clippy::type_complexity)]
fn build_monoid(
    alphabet_len: usize,
    dfas: &[crate::semigroup::nfa::Dfa],
) -> Result<(Monoid, Vec<MElem>, Vec<Vec<u16>>, Vec<usize>), LevelError> {
    // Function space over the disjoint union of all machine states.
    let mut offsets = Vec::new();
    let mut total = 0usize;
    for d in dfas {
        offsets.push(total);
        total += d.n_states;
    }
    let identity: Vec<u16> = (0..total as u16).collect();
    let mut elems: Vec<Vec<u16>> = vec![identity];
    let mut index: BTreeMap<Vec<u16>, MElem> = [(elems[0].clone(), 0)].into_iter().collect();

    let mut letter_elem: Vec<MElem> = Vec::with_capacity(alphabet_len);
    let mut work: Vec<MElem> = Vec::new();
    for c in 0..alphabet_len {
        let mut f: Vec<u16> = Vec::with_capacity(total);
        for (di, d) in dfas.iter().enumerate() {
            for s in 0..d.n_states {
                f.push((offsets[di] + d.trans[s][c]) as u16);
            }
        }
        let id = match index.get(&f) {
            Some(&i) => i,
            None => {
                let i = elems.len() as MElem;
                index.insert(f.clone(), i);
                elems.push(f);
                work.push(i);
                i
            }
        };
        letter_elem.push(id);
    }
    while let Some(x) = work.pop() {
        for c in 0..alphabet_len {
            let g = elems[letter_elem[c] as usize].clone();
            let fx = &elems[x as usize];
            let composed: Vec<u16> = fx.iter().map(|&s| g[s as usize]).collect();
            if !index.contains_key(&composed) {
                if elems.len() >= MONOID_CAP {
                    return Err(LevelError::MonoidTooBig(elems.len()));
                }
                let i = elems.len() as MElem;
                index.insert(composed.clone(), i);
                elems.push(composed);
                work.push(i);
            }
        }
    }
    let n = elems.len();
    let mut mul_table = vec![0 as MElem; n * n];
    for a in 0..n {
        for b in 0..n {
            let composed: Vec<u16> = elems[a].iter().map(|&s| elems[b][s as usize]).collect();
            mul_table[a * n + b] = index[&composed];
        }
    }
    Ok((Monoid { n, mul_table }, letter_elem, elems, offsets))
}

/// Stratifies the formula and compiles one monoid per level.
pub fn nesting_levels(eta: &NodeExpr) -> Result<Levels, LevelError> {
    nesting_levels_with_extra(eta, &[])
}

/// Same, with extra paths registered at the top level (used to compile the
/// whole-tree wrapper alongside the formula's own paths).
pub fn nesting_levels_with_extra(eta: &NodeExpr, extra: &[PathExpr]) -> Result<Levels, LevelError> {
    let mut formulas = Vec::new();
    collect_formulas(eta, &mut formulas);
    for p in extra {
        collect_paths_formulas(p, &mut formulas);
    }
    formulas.sort();
    formulas.dedup();
    let formula_level: Vec<usize> = formulas.iter().map(formula_nesting).collect();
    let neg_of: Vec<FormulaId> = formulas
        .iter()
        .map(|f| {
            let n = simple_neg(f);
            formulas.iter().position(|x| *x == n).expect("closed under simple negation")
        })
        .collect();

    let mut paths = Vec::new();
    collect_tested_paths(eta, &mut paths);
    for p in extra {
        if !paths.contains(p) {
            paths.push(p.clone());
        }
    }
    let path_level: Vec<usize> = paths.iter().map(path_nesting).collect();

    let top = formula_nesting(eta)
        .max(path_level.iter().copied().max().unwrap_or(0))
        .max(extra.iter().map(path_nesting).max().unwrap_or(0));

    let mut levels = Vec::new();
    for i in 0..=top {
        let lvl_formulas: Vec<FormulaId> =
            (0..formulas.len()).filter(|&f| formula_level[f] <= i).collect();
        let lvl_paths: Vec<PathId> = (0..paths.len()).filter(|&p| path_level[p] <= i).collect();

        // Loop alphabet: up, down, one filter letter per level formula.
        let mut filter_index: BTreeMap<FormulaId, usize> = BTreeMap::new();
        for (k, &f) in lvl_formulas.iter().enumerate() {
            filter_index.insert(f, 2 + k);
        }
        let alphabet_len = 2 + lvl_formulas.len();

        let dfas: Vec<crate::semigroup::nfa::Dfa> = lvl_paths
            .iter()
            .map(|&pid| {
                let re = path_to_regex(&paths[pid], &filter_index, &formulas);
                Nfa::from_regex(&re, alphabet_len).determinize()
            })
            .collect();
        let (monoid, letter_elem, funs, offsets) = build_monoid(alphabet_len, &dfas)?;

        let mut accepting: BTreeMap<PathId, BTreeSet<MElem>> = BTreeMap::new();
        for (k, &pid) in lvl_paths.iter().enumerate() {
            let dfa = &dfas[k];
            let start = offsets[k] + dfa.start;
            let set: BTreeSet<MElem> = (0..monoid.n as MElem)
                .filter(|&e| {
                    let image = funs[e as usize][start] as usize;
                    dfa.accept[image - offsets[k]]
                })
                .collect();
            accepting.insert(pid, set);
        }

        let g_filter: BTreeMap<FormulaId, MElem> = lvl_formulas
            .iter()
            .enumerate()
            .map(|(k, &f)| (f, letter_elem[2 + k]))
            .collect();
        levels.push(LevelData {
            level: i,
            formulas: lvl_formulas,
            paths: lvl_paths,
            monoid,
            g_up: letter_elem[0],
            g_down: letter_elem[1],
            g_filter,
            accepting,
        });
    }

    Ok(Levels { formulas, formula_level, neg_of, paths, path_level, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xpath::parser::parse_node_expr;

    #[test]
    fn boolean_formula_has_single_level() {
        let lv = nesting_levels(&parse_node_expr("a and not b").unwrap()).unwrap();
        assert_eq!(lv.levels.len(), 1);
        assert!(lv.paths.is_empty());
    }

    #[test]
    fn one_data_test_gives_two_levels() {
        let lv = nesting_levels(&parse_node_expr("<down/[a] = down/[b]>").unwrap()).unwrap();
        assert_eq!(lv.levels.len(), 2);
        assert_eq!(lv.levels[1].paths.len(), 2);
    }

    #[test]
    fn nested_data_test_gives_three_levels() {
        let lv =
            nesting_levels(&parse_node_expr("<down*/[<down/[a] = down/[a]>]>").unwrap()).unwrap();
        assert_eq!(lv.levels.len(), 3);
    }

    #[test]
    fn levels_are_monotone() {
        let lv = nesting_levels(&parse_node_expr("<down*/[<down/[a] != down/[b]>]>").unwrap())
            .unwrap();
        for w in lv.levels.windows(2) {
            let lo: BTreeSet<_> = w[0].formulas.iter().collect();
            let hi: BTreeSet<_> = w[1].formulas.iter().collect();
            assert!(lo.is_subset(&hi));
        }
    }

    #[test]
    fn monoid_recognizes_path_words() {
        // Path down/[a]: word (down)([a]) accepted, nothing else of length <= 2.
        let lv = nesting_levels(&parse_node_expr("<down/[a]>").unwrap()).unwrap();
        let l = &lv.levels[1];
        let pid = lv.path_id(&crate::xpath::parser::parse_path_expr("down/[a]").unwrap()).unwrap();
        let acc = &l.accepting[&pid];
        let a_id = lv.formula_id(&NodeExpr::Label("a".into())).unwrap();
        let w = l.monoid.mul(l.g_down, l.g_filter[&a_id]);
        assert!(acc.contains(&w));
        assert!(!acc.contains(&l.g_down));
        assert!(!acc.contains(&l.monoid.unit()));
        assert!(!acc.contains(&l.monoid.mul(l.g_filter[&a_id], l.g_down)));
    }

    #[test]
    fn generated_submonoid_contains_unit_and_closes() {
        let lv = nesting_levels(&parse_node_expr("<down*/[a]>").unwrap()).unwrap();
        let l = &lv.levels[1];
        let sub = l.monoid.generated([l.g_down]);
        assert!(sub.contains(&l.monoid.unit()));
        for &x in &sub {
            for &y in &sub {
                assert!(sub.contains(&l.monoid.mul(x, y)));
            }
        }
    }
}
