//! Finite ordered unranked data trees.
//!
//! Every node carries a label from a finite alphabet and a datum from an
//! infinite domain (rendered as a non-negative integer; only equality of
//! data is meaningful). Nodes may additionally carry an internal label.
//!
//! Text format: `node := LABEL '#' NAT internal? children?`,
//! `internal := '@' IDENT`, `children := '(' node (',' node)* ')'`.
//! Example: `a#1@b0( b#1, b#2 )`.

use std::collections::BTreeMap;
use std::fmt;

use crate::semigroup::{ElemId, Recognizer};

/// Tree position: a sequence of 1-based child indices; empty = root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position(pub Vec<u32>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn child(&self, i: u32) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn parent(&self) -> Option<Position> {
        if self.0.is_empty() {
            None
        } else {
            Position(self.0[..self.0.len() - 1].to_vec()).into()
        }
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "ε")
        } else {
            let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataValue(pub u64);

impl fmt::Display for DataValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeData {
    pub label: String,
    pub datum: DataValue,
    pub internal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataTree {
    nodes: BTreeMap<Position, NodeData>,
    /// Number of children per position, derived once at construction.
    arity: BTreeMap<Position, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("position {0} absent from the tree")]
    NoSuchPosition(String),
    #[error("tree has no internal labels")]
    MissingInternalLabels,
    #[error("invalid position set: {0}")]
    BadShape(String),
}

impl DataTree {
    /// Builds a tree from an explicit node map, checking the position-set
    /// conditions (nonempty, prefix-closed, sibling-closed) and that internal
    /// labels are either everywhere or nowhere.
    pub fn new(nodes: BTreeMap<Position, NodeData>) -> Result<DataTree, TreeError> {
        if nodes.is_empty() {
            return Err(TreeError::BadShape("empty node set".into()));
        }
        if !nodes.contains_key(&Position::root()) {
            return Err(TreeError::BadShape("missing root".into()));
        }
        for pos in nodes.keys() {
            if let Some(p) = pos.parent() {
                if !nodes.contains_key(&p) {
                    return Err(TreeError::BadShape(format!("position {pos} lacks its parent")));
                }
            }
            if let Some((&last, rest)) = pos.0.split_last() {
                if last == 0 {
                    return Err(TreeError::BadShape(format!("position {pos} uses index 0")));
                }
                if last > 1 {
                    let sib = Position([rest, &[last - 1]].concat());
                    if !nodes.contains_key(&sib) {
                        return Err(TreeError::BadShape(format!(
                            "position {pos} present but sibling {sib} missing"
                        )));
                    }
                }
            }
        }
        let with_internal = nodes.values().filter(|n| n.internal.is_some()).count();
        if with_internal != 0 && with_internal != nodes.len() {
            return Err(TreeError::BadShape("internal labels must cover all positions or none".into()));
        }
        let mut arity: BTreeMap<Position, u32> = nodes.keys().map(|p| (p.clone(), 0)).collect();
        for pos in nodes.keys() {
            if let Some((&last, rest)) = pos.0.split_last() {
                let parent = Position(rest.to_vec());
                let e = arity.get_mut(&parent).unwrap();
                *e = (*e).max(last);
            }
        }
        Ok(DataTree { nodes, arity })
    }

    pub fn single(label: &str, datum: u64, internal: Option<&str>) -> DataTree {
        let mut m = BTreeMap::new();
        m.insert(
            Position::root(),
            NodeData { label: label.into(), datum: DataValue(datum), internal: internal.map(String::from) },
        );
        DataTree::new(m).unwrap()
    }

    pub fn node(&self, pos: &Position) -> Option<&NodeData> {
        self.nodes.get(pos)
    }

    pub fn positions(&self) -> impl Iterator<Item = &Position> {
        self.nodes.keys()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a valid tree always has a root
    }

    pub fn child_count(&self, pos: &Position) -> u32 {
        self.arity.get(pos).copied().unwrap_or(0)
    }

    pub fn children(&self, pos: &Position) -> impl Iterator<Item = Position> + '_ {
        let base = pos.clone();
        (1..=self.child_count(pos)).map(move |i| base.child(i))
    }

    pub fn is_leaf(&self, pos: &Position) -> bool {
        self.child_count(pos) == 0
    }

    pub fn has_internal(&self) -> bool {
        self.nodes.values().next().is_some_and(|n| n.internal.is_some())
    }

    /// Replaces the internal labeling wholesale.
    pub fn with_internal(&self, labeling: &BTreeMap<Position, String>) -> DataTree {
        let mut nodes = self.nodes.clone();
        for (pos, n) in nodes.iter_mut() {
            n.internal = labeling.get(pos).cloned();
        }
        DataTree::new(nodes).expect("shape unchanged")
    }

    pub fn strip_internal(&self) -> DataTree {
        let mut nodes = self.nodes.clone();
        for n in nodes.values_mut() {
            n.internal = None;
        }
        DataTree::new(nodes).expect("shape unchanged")
    }

    /// The subtree rooted at `pos`: positions re-based so `pos` becomes ε.
    pub fn subtree(&self, pos: &Position) -> Result<DataTree, TreeError> {
        if !self.nodes.contains_key(pos) {
            return Err(TreeError::NoSuchPosition(pos.to_string()));
        }
        let mut nodes = BTreeMap::new();
        for (p, n) in &self.nodes {
            if pos.is_prefix_of(p) {
                nodes.insert(Position(p.0[pos.0.len()..].to_vec()), n.clone());
            }
        }
        DataTree::new(nodes)
    }

    /// The set of data values occurring in the subtree at `pos`.
    pub fn subtree_data(&self, pos: &Position) -> Result<std::collections::BTreeSet<DataValue>, TreeError> {
        if !self.nodes.contains_key(pos) {
            return Err(TreeError::NoSuchPosition(pos.to_string()));
        }
        Ok(self
            .nodes
            .iter()
            .filter(|(p, _)| pos.is_prefix_of(p))
            .map(|(_, n)| n.datum)
            .collect())
    }

    pub fn data(&self) -> std::collections::BTreeSet<DataValue> {
        self.nodes.values().map(|n| n.datum).collect()
    }

    /// Downward paths from `pos` pair up with descendants of `pos`: the word
    /// of a descendant is the label sequence along the unique simple path.
    pub fn descendants<'a>(&'a self, pos: &'a Position) -> impl Iterator<Item = &'a Position> + 'a {
        self.nodes.keys().filter(move |p| pos.is_prefix_of(p))
    }

    pub fn parse(text: &str) -> Result<DataTree, TreeError> {
        let mut p = TreeParser { src: text.as_bytes(), pos: 0 };
        let mut nodes = BTreeMap::new();
        p.node(&Position::root(), &mut nodes)?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        DataTree::new(nodes)
    }
}

impl fmt::Display for DataTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &DataTree, pos: &Position, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let n = t.node(pos).unwrap();
            write!(f, "{}#{}", n.label, n.datum)?;
            if let Some(b) = &n.internal {
                write!(f, "@{b}")?;
            }
            let k = t.child_count(pos);
            if k > 0 {
                write!(f, "(")?;
                for i in 1..=k {
                    if i > 1 {
                        write!(f, ",")?;
                    }
                    go(t, &pos.child(i), f)?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }
        go(self, &Position::root(), f)
    }
}

struct TreeParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> TreeParser<'a> {
    fn line_col(&self) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &b in &self.src[..self.pos] {
            if b == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn err(&self, msg: impl Into<String>) -> TreeError {
        let (line, col) = self.line_col();
        TreeError::Syntax { line, col, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).map(|&b| b as char)
    }

    fn ident(&mut self) -> Result<String, TreeError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos] as char;
            if c.is_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.err("expected identifier"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn nat(&mut self) -> Result<u64, TreeError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn node(&mut self, at: &Position, out: &mut BTreeMap<Position, NodeData>) -> Result<(), TreeError> {
        let label = self.ident()?;
        if self.peek() != Some('#') {
            return Err(self.err("expected '#' after label"));
        }
        self.pos += 1;
        let datum = self.nat()?;
        let internal = if self.peek() == Some('@') {
            self.pos += 1;
            Some(self.ident()?)
        } else {
            None
        };
        out.insert(at.clone(), NodeData { label, datum: DataValue(datum), internal });
        if self.peek() == Some('(') {
            self.pos += 1;
            let mut i = 1;
            loop {
                self.node(&at.child(i), out)?;
                match self.peek() {
                    Some(',') => {
                        self.pos += 1;
                        i += 1;
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected ',' or ')'")),
                }
            }
        }
        Ok(())
    }
}

/// The downward-path summary set of a tree with internal labels: all pairs
/// `(h(w), d)` where some path from the root ends at a node with datum `d`
/// and its letter word evaluates to `h(w)`. Computed bottom-up.
pub fn gamma_of(
    tree: &DataTree,
    rec: &Recognizer<crate::automaton::Letter>,
    labels: &[String],
    internals: &[String],
) -> Result<std::collections::BTreeSet<(ElemId, DataValue)>, TreeError> {
    if !tree.has_internal() {
        return Err(TreeError::MissingInternalLabels);
    }
    gamma_at(tree, &Position::root(), rec, labels, internals)
}

fn gamma_at(
    tree: &DataTree,
    pos: &Position,
    rec: &Recognizer<crate::automaton::Letter>,
    labels: &[String],
    internals: &[String],
) -> Result<std::collections::BTreeSet<(ElemId, DataValue)>, TreeError> {
    let n = tree.node(pos).unwrap();
    let li = labels
        .iter()
        .position(|l| *l == n.label)
        .ok_or_else(|| TreeError::BadShape(format!("label {} not in alphabet", n.label)))?;
    let bi = internals
        .iter()
        .position(|b| Some(b) == n.internal.as_ref())
        .ok_or_else(|| TreeError::BadShape("internal label not in alphabet".into()))?;
    let letter = crate::automaton::Letter { label: li as u32, internal: bi as u32 };
    let c = rec
        .letter_index(&letter)
        .ok_or_else(|| TreeError::BadShape("letter missing from recognizer".into()))?;
    let h_c = rec.letter_image(c);
    let mut out = std::collections::BTreeSet::new();
    out.insert((h_c, n.datum));
    for ch in tree.children(pos) {
        for (mu, d) in gamma_at(tree, &ch, rec, labels, internals)? {
            out.insert((rec.product(h_c, mu), d));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_single_node() {
        let t = DataTree::parse("a#1").unwrap();
        assert_eq!(t.len(), 1);
        let n = t.node(&Position::root()).unwrap();
        assert_eq!(n.label, "a");
        assert_eq!(n.datum, DataValue(1));
    }

    #[test]
    fn parse_two_children() {
        let t = DataTree::parse("a#1( b#1, b#2 )").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.node(&Position(vec![1])).unwrap().datum, DataValue(1));
        assert_eq!(t.node(&Position(vec![2])).unwrap().datum, DataValue(2));
    }

    #[test]
    fn parse_chain() {
        let t = DataTree::parse("a#1( b#2( c#1 ) )").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.node(&Position(vec![1, 1])).unwrap().label, "c");
    }

    #[test]
    fn print_round_trips() {
        for src in ["a#1", "a#1(b#1,b#2)", "a#1@b0(b#2@b1(c#1@b0))"] {
            let t = DataTree::parse(src).unwrap();
            let t2 = DataTree::parse(&t.to_string()).unwrap();
            assert_eq!(t, t2);
        }
    }

    #[test]
    fn syntax_errors_carry_location() {
        match DataTree::parse("a#1(\n  b2 )") {
            Err(TreeError::Syntax { line: 2, .. }) => {}
            other => panic!("expected syntax error on line 2, got {other:?}"),
        }
    }

    #[test]
    fn subtree_at_root_is_identity() {
        let t = DataTree::parse("a#1(b#2)").unwrap();
        assert_eq!(t.subtree(&Position::root()).unwrap(), t);
    }

    #[test]
    fn subtree_extracts_leaf() {
        let t = DataTree::parse("a#1(b#2)").unwrap();
        let s = t.subtree(&Position(vec![1])).unwrap();
        assert_eq!(s.to_string(), "b#2");
    }

    #[test]
    fn subtree_second_child() {
        let t = DataTree::parse("a#1(b#1,b#2)").unwrap();
        assert_eq!(t.subtree(&Position(vec![2])).unwrap().to_string(), "b#2");
    }

    #[test]
    fn subtree_rebases_positions() {
        let t = DataTree::parse("a#1(b#2(c#3,d#4))").unwrap();
        let s = t.subtree(&Position(vec![1])).unwrap();
        assert_eq!(s.node(&Position(vec![2])).unwrap().label, "d");
    }

    #[test]
    fn subtree_missing_position() {
        let t = DataTree::parse("a#1").unwrap();
        assert!(matches!(t.subtree(&Position(vec![1])), Err(TreeError::NoSuchPosition(_))));
    }

    #[test]
    fn subtree_data_values() {
        let t = DataTree::parse("a#1(b#1,b#2)").unwrap();
        let d: Vec<u64> = t.subtree_data(&Position::root()).unwrap().iter().map(|d| d.0).collect();
        assert_eq!(d, vec![1, 2]);
        let d1: Vec<u64> = t.subtree_data(&Position(vec![1])).unwrap().iter().map(|d| d.0).collect();
        assert_eq!(d1, vec![1]);
        let t2 = DataTree::parse("a#1(b#2(c#2))").unwrap();
        let d2: Vec<u64> = t2.subtree_data(&Position(vec![1])).unwrap().iter().map(|d| d.0).collect();
        assert_eq!(d2, vec![2]);
    }

    #[test]
    fn rejects_sibling_gaps() {
        // Handmade map with child 2 but no child 1.
        let mut m = BTreeMap::new();
        m.insert(Position::root(), NodeData { label: "a".into(), datum: DataValue(0), internal: None });
        m.insert(Position(vec![2]), NodeData { label: "b".into(), datum: DataValue(0), internal: None });
        assert!(matches!(DataTree::new(m), Err(TreeError::BadShape(_))));
    }

    #[test]
    fn internal_labels_all_or_none() {
        let mut m = BTreeMap::new();
        m.insert(Position::root(), NodeData { label: "a".into(), datum: DataValue(0), internal: Some("b0".into()) });
        m.insert(Position(vec![1]), NodeData { label: "b".into(), datum: DataValue(0), internal: None });
        assert!(matches!(DataTree::new(m), Err(TreeError::BadShape(_))));
    }
}
