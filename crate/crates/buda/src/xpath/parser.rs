//! Surface syntax.
//!
//! ```text
//! path := seq ('|' seq)*
//! seq  := star ('/' star)*
//! star := atom '*'?
//! atom := 'self' | 'down' | 'up' | '[' node ']' | '(' path ')'
//! node := disj ; disj := conj ('or' conj)* ; conj := unary ('and' unary)*
//! unary := 'not' unary | prim
//! prim := 'true' | LABEL | '<' path '>' | '<' path '=' path '>'
//!       | '<' path '!=' path '>' | '(' node ')'
//! ```
//!
//! `and` binds tighter than `or`. The words `self down up true not and or`
//! are reserved and cannot be labels.

use super::{NodeExpr, PathExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("query syntax error at byte {pos}: {msg}")]
pub struct XpathParseError {
    pub pos: usize,
    pub msg: String,
}

pub const RESERVED: [&str; 7] = ["self", "down", "up", "true", "not", "and", "or"];

struct P<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> P<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).map(|&b| b as char)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, XpathParseError> {
        Err(XpathParseError { pos: self.pos, msg: msg.into() })
    }

    fn ident(&mut self) -> Option<String> {
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
        (self.pos > start).then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn peek_ident(&mut self) -> Option<String> {
        let save = self.pos;
        let id = self.ident();
        self.pos = save;
        id
    }

    fn path(&mut self) -> Result<PathExpr, XpathParseError> {
        let mut p = self.seq()?;
        while self.eat('|') {
            let rhs = self.seq()?;
            p = PathExpr::Union(Box::new(p), Box::new(rhs));
        }
        Ok(p)
    }

    fn seq(&mut self) -> Result<PathExpr, XpathParseError> {
        let mut p = self.star()?;
        while self.eat('/') {
            let rhs = self.star()?;
            p = PathExpr::seq(p, rhs);
        }
        Ok(p)
    }

    fn star(&mut self) -> Result<PathExpr, XpathParseError> {
        let mut p = self.atom()?;
        while self.eat('*') {
            p = PathExpr::Star(Box::new(p));
        }
        Ok(p)
    }

    fn atom(&mut self) -> Result<PathExpr, XpathParseError> {
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let n = self.node()?;
                if !self.eat(']') {
                    return self.err("expected ']'");
                }
                Ok(PathExpr::Filter(Box::new(n)))
            }
            Some('(') => {
                self.pos += 1;
                let p = self.path()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(p)
            }
            _ => match self.ident().as_deref() {
                Some("self") => Ok(PathExpr::SelfStep),
                Some("down") => Ok(PathExpr::Down),
                Some("up") => Ok(PathExpr::Up),
                Some(other) => self.err(format!("expected path step, found '{other}'")),
                None => self.err("expected path step"),
            },
        }
    }

    fn node(&mut self) -> Result<NodeExpr, XpathParseError> {
        let mut n = self.conj()?;
        while self.peek_ident().as_deref() == Some("or") {
            self.ident();
            let rhs = self.conj()?;
            n = n.or(rhs);
        }
        Ok(n)
    }

    fn conj(&mut self) -> Result<NodeExpr, XpathParseError> {
        let mut n = self.unary()?;
        while self.peek_ident().as_deref() == Some("and") {
            self.ident();
            let rhs = self.unary()?;
            n = n.and(rhs);
        }
        Ok(n)
    }

    fn unary(&mut self) -> Result<NodeExpr, XpathParseError> {
        if self.peek_ident().as_deref() == Some("not") {
            self.ident();
            return Ok(self.unary()?.not());
        }
        self.prim()
    }

    fn prim(&mut self) -> Result<NodeExpr, XpathParseError> {
        match self.peek() {
            Some('<') => {
                self.pos += 1;
                let a = self.path()?;
                match self.peek() {
                    Some('>') => {
                        self.pos += 1;
                        Ok(NodeExpr::Some(Box::new(a)))
                    }
                    Some('=') => {
                        self.pos += 1;
                        let b = self.path()?;
                        if !self.eat('>') {
                            return self.err("expected '>'");
                        }
                        Ok(NodeExpr::Eq(Box::new(a), Box::new(b)))
                    }
                    Some('!') => {
                        self.pos += 1;
                        if !self.eat('=') {
                            return self.err("expected '=' after '!'");
                        }
                        let b = self.path()?;
                        if !self.eat('>') {
                            return self.err("expected '>'");
                        }
                        Ok(NodeExpr::Neq(Box::new(a), Box::new(b)))
                    }
                    _ => self.err("expected '>', '=' or '!=' in data test"),
                }
            }
            Some('(') => {
                self.pos += 1;
                let n = self.node()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(n)
            }
            _ => match self.ident() {
                Some(id) if id == "true" => Ok(NodeExpr::True),
                Some(id) if RESERVED.contains(&id.as_str()) => {
                    self.err(format!("reserved word '{id}' cannot be a label"))
                }
                Some(id) => Ok(NodeExpr::Label(id)),
                None => self.err("expected node expression"),
            },
        }
    }
}

pub fn parse_node_expr(src: &str) -> Result<NodeExpr, XpathParseError> {
    let mut p = P { src: src.as_bytes(), pos: 0 };
    let n = p.node()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input");
    }
    Ok(n)
}

pub fn parse_path_expr(src: &str) -> Result<PathExpr, XpathParseError> {
    let mut p = P { src: src.as_bytes(), pos: 0 };
    let n = p.path()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input");
    }
    Ok(n)
}

/// A formula is a node expression or, failing that, a path expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Node(NodeExpr),
    Path(PathExpr),
}

pub fn parse_xpath(src: &str) -> Result<Formula, XpathParseError> {
    match parse_node_expr(src) {
        Ok(n) => Ok(Formula::Node(n)),
        Err(e_node) => match parse_path_expr(src) {
            Ok(p) => Ok(Formula::Path(p)),
            Err(_) => Err(e_node),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_data_test_pair() {
        let n = parse_node_expr("<down/[a] = down/[b]>").unwrap();
        assert_eq!(
            n,
            NodeExpr::Eq(
                Box::new(PathExpr::Down.filtered(NodeExpr::Label("a".into()))),
                Box::new(PathExpr::Down.filtered(NodeExpr::Label("b".into()))),
            )
        );
    }

    #[test]
    fn parses_descendant_with_unequal_children() {
        // A node below with two same-labeled children carrying different data.
        let n = parse_node_expr("<down*/[b and <down/[b] != down/[b]>]>").unwrap();
        let inner = NodeExpr::Neq(
            Box::new(PathExpr::Down.filtered(NodeExpr::Label("b".into()))),
            Box::new(PathExpr::Down.filtered(NodeExpr::Label("b".into()))),
        );
        let expected = NodeExpr::Some(Box::new(PathExpr::seq(
            PathExpr::Star(Box::new(PathExpr::Down)),
            PathExpr::Filter(Box::new(NodeExpr::Label("b".into()).and(inner))),
        )));
        assert_eq!(n, expected);
    }

    #[test]
    fn parses_negation() {
        assert_eq!(parse_node_expr("not a").unwrap(), NodeExpr::Label("a".into()).not());
    }

    #[test]
    fn and_binds_tighter_than_or() {
        let n = parse_node_expr("a or b and c").unwrap();
        assert_eq!(
            n,
            NodeExpr::Label("a".into())
                .or(NodeExpr::Label("b".into()).and(NodeExpr::Label("c".into())))
        );
    }

    #[test]
    fn printer_round_trips() {
        for src in [
            "<down/[a] = down/[b]>",
            "not (a and b) or true",
            "<(down|up)*/[a]>",
            "<up/down/[b] != self/[a]>",
        ] {
            let n = parse_node_expr(src).unwrap();
            let n2 = parse_node_expr(&n.to_string()).unwrap();
            assert_eq!(n, n2, "printing {src} as {n}");
        }
    }

    #[test]
    fn reports_position() {
        let e = parse_node_expr("a and (b or ]").unwrap_err();
        assert!(e.pos > 0);
    }
}
