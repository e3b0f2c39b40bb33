//! Vertical path queries with data-equality tests: abstract syntax, parser,
//! direct evaluator, and the compilation into a bottom-up data automaton.

pub mod eval;
pub mod levels;
pub mod parser;
pub mod sat;
pub mod translate;

use std::fmt;

/// Path expressions denote binary relations over tree positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathExpr {
    SelfStep,
    Down,
    Up,
    Filter(Box<NodeExpr>),
    Seq(Box<PathExpr>, Box<PathExpr>),
    Union(Box<PathExpr>, Box<PathExpr>),
    Star(Box<PathExpr>),
}

/// Node expressions denote position sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeExpr {
    True,
    Label(String),
    Not(Box<NodeExpr>),
    And(Box<NodeExpr>, Box<NodeExpr>),
    Or(Box<NodeExpr>, Box<NodeExpr>),
    /// Some path leads somewhere.
    Some(Box<PathExpr>),
    /// Two paths reach equal data.
    Eq(Box<PathExpr>, Box<PathExpr>),
    /// Two paths reach different data.
    Neq(Box<PathExpr>, Box<PathExpr>),
}

impl PathExpr {
    pub fn seq(a: PathExpr, b: PathExpr) -> PathExpr {
        PathExpr::Seq(Box::new(a), Box::new(b))
    }

    pub fn filtered(self, f: NodeExpr) -> PathExpr {
        PathExpr::seq(self, PathExpr::Filter(Box::new(f)))
    }

    pub fn size(&self) -> usize {
        match self {
            PathExpr::SelfStep | PathExpr::Down | PathExpr::Up => 1,
            PathExpr::Filter(f) => 1 + f.size(),
            PathExpr::Seq(a, b) | PathExpr::Union(a, b) => 1 + a.size() + b.size(),
            PathExpr::Star(a) => 1 + a.size(),
        }
    }
}

impl NodeExpr {
    pub fn not(self) -> NodeExpr {
        NodeExpr::Not(Box::new(self))
    }

    pub fn and(self, other: NodeExpr) -> NodeExpr {
        NodeExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: NodeExpr) -> NodeExpr {
        NodeExpr::Or(Box::new(self), Box::new(other))
    }

    pub fn size(&self) -> usize {
        match self {
            NodeExpr::True | NodeExpr::Label(_) => 1,
            NodeExpr::Not(f) => 1 + f.size(),
            NodeExpr::And(a, b) | NodeExpr::Or(a, b) => 1 + a.size() + b.size(),
            NodeExpr::Some(p) => 1 + p.size(),
            NodeExpr::Eq(a, b) | NodeExpr::Neq(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Negation normal form: negations pushed onto labels, `true` and data
    /// tests.
    pub fn nnf(&self) -> NodeExpr {
        fn pos(e: &NodeExpr) -> NodeExpr {
            match e {
                NodeExpr::Not(f) => neg(f),
                NodeExpr::And(a, b) => pos(a).and(pos(b)),
                NodeExpr::Or(a, b) => pos(a).or(pos(b)),
                other => other.clone(),
            }
        }
        fn neg(e: &NodeExpr) -> NodeExpr {
            match e {
                NodeExpr::Not(f) => pos(f),
                NodeExpr::And(a, b) => neg(a).or(neg(b)),
                NodeExpr::Or(a, b) => neg(a).and(neg(b)),
                other => other.clone().not(),
            }
        }
        pos(self)
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence: union < seq < star/atom.
        fn go(p: &PathExpr, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
            match p {
                PathExpr::SelfStep => write!(f, "self"),
                PathExpr::Down => write!(f, "down"),
                PathExpr::Up => write!(f, "up"),
                PathExpr::Filter(n) => write!(f, "[{n}]"),
                PathExpr::Seq(a, b) => {
                    if prec > 1 {
                        write!(f, "(")?;
                    }
                    go(a, f, 1)?;
                    write!(f, "/")?;
                    go(b, f, 1)?;
                    if prec > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                PathExpr::Union(a, b) => {
                    if prec > 0 {
                        write!(f, "(")?;
                    }
                    go(a, f, 0)?;
                    write!(f, "|")?;
                    go(b, f, 0)?;
                    if prec > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                PathExpr::Star(a) => {
                    match **a {
                        PathExpr::SelfStep | PathExpr::Down | PathExpr::Up | PathExpr::Filter(_) => {
                            go(a, f, 2)?
                        }
                        _ => {
                            write!(f, "(")?;
                            go(a, f, 0)?;
                            write!(f, ")")?;
                        }
                    }
                    write!(f, "*")
                }
            }
        }
        go(self, f, 0)
    }
}

impl fmt::Display for NodeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence: or < and < unary.
        fn go(n: &NodeExpr, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
            match n {
                NodeExpr::True => write!(f, "true"),
                NodeExpr::Label(a) => write!(f, "{a}"),
                NodeExpr::Not(x) => {
                    write!(f, "not ")?;
                    go(x, f, 2)
                }
                NodeExpr::And(a, b) => {
                    if prec > 1 {
                        write!(f, "(")?;
                    }
                    go(a, f, 1)?;
                    write!(f, " and ")?;
                    go(b, f, 1)?;
                    if prec > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                NodeExpr::Or(a, b) => {
                    if prec > 0 {
                        write!(f, "(")?;
                    }
                    go(a, f, 0)?;
                    write!(f, " or ")?;
                    go(b, f, 0)?;
                    if prec > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                NodeExpr::Some(p) => write!(f, "<{p}>"),
                NodeExpr::Eq(a, b) => write!(f, "<{a} = {b}>"),
                NodeExpr::Neq(a, b) => write!(f, "<{a} != {b}>"),
            }
        }
        go(self, f, 0)
    }
}
