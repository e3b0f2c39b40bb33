//! Regular expression ASTs and the surface parser.
//!
//! Concatenation is juxtaposition (or `.`), union is `|`, Kleene star `*`.
//! Plain letters are single alphanumeric characters; letters of a product
//! alphabet are written as pairs `(a,b0)`.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex<L> {
    Empty,
    Epsilon,
    /// One letter drawn from a nonempty set. A singleton is a plain letter.
    Class(Vec<L>),
    Concat(Box<Regex<L>>, Box<Regex<L>>),
    Union(Box<Regex<L>>, Box<Regex<L>>),
    Star(Box<Regex<L>>),
}

impl<L> Regex<L> {
    pub fn letter(l: L) -> Self {
        Regex::Class(vec![l])
    }

    pub fn concat(a: Regex<L>, b: Regex<L>) -> Self {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    pub fn union(a: Regex<L>, b: Regex<L>) -> Self {
        Regex::Union(Box::new(a), Box::new(b))
    }

    pub fn star(a: Regex<L>) -> Self {
        Regex::Star(Box::new(a))
    }

    pub fn map<M>(&self, f: &mut impl FnMut(&L) -> M) -> Regex<M> {
        match self {
            Regex::Empty => Regex::Empty,
            Regex::Epsilon => Regex::Epsilon,
            Regex::Class(ls) => Regex::Class(ls.iter().map(|l| f(l)).collect()),
            Regex::Concat(a, b) => Regex::Concat(Box::new(a.map(f)), Box::new(b.map(f))),
            Regex::Union(a, b) => Regex::Union(Box::new(a.map(f)), Box::new(b.map(f))),
            Regex::Star(a) => Regex::Star(Box::new(a.map(f))),
        }
    }

    /// Maps letters, failing when the mapping rejects one.
    pub fn try_map<M, E>(&self, f: &mut impl FnMut(&L) -> Result<M, E>) -> Result<Regex<M>, E> {
        Ok(match self {
            Regex::Empty => Regex::Empty,
            Regex::Epsilon => Regex::Epsilon,
            Regex::Class(ls) => {
                let mut out = Vec::with_capacity(ls.len());
                for l in ls {
                    out.push(f(l)?);
                }
                Regex::Class(out)
            }
            Regex::Concat(a, b) => Regex::Concat(Box::new(a.try_map(f)?), Box::new(b.try_map(f)?)),
            Regex::Union(a, b) => Regex::Union(Box::new(a.try_map(f)?), Box::new(b.try_map(f)?)),
            Regex::Star(a) => Regex::Star(Box::new(a.try_map(f)?)),
        })
    }
}

/// A letter as written in source text, before resolution against an alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RawLetter {
    Plain(String),
    Pair(String, String),
}

impl fmt::Display for RawLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawLetter::Plain(s) => write!(f, "{s}"),
            RawLetter::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("regex syntax error at byte {pos}: {msg}")]
pub struct RegexParseError {
    pub pos: usize,
    pub msg: String,
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).map(|&b| b as char)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, RegexParseError> {
        Err(RegexParseError { pos: self.pos, msg: msg.into() })
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
        if self.pos > start {
            Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
        } else {
            None
        }
    }
}

/// Parses the surface syntax into a raw-letter regex.
pub fn parse_regex(src: &str) -> Result<Regex<RawLetter>, RegexParseError> {
    let mut sc = Scanner { src: src.as_bytes(), pos: 0 };
    let re = parse_union(&mut sc)?;
    sc.skip_ws();
    if sc.pos != sc.src.len() {
        return sc.err("trailing input");
    }
    Ok(re)
}

fn parse_union(sc: &mut Scanner) -> Result<Regex<RawLetter>, RegexParseError> {
    let mut re = parse_concat(sc)?;
    while sc.peek() == Some('|') {
        sc.bump();
        let rhs = parse_concat(sc)?;
        re = Regex::union(re, rhs);
    }
    Ok(re)
}

fn parse_concat(sc: &mut Scanner) -> Result<Regex<RawLetter>, RegexParseError> {
    let mut parts: Vec<Regex<RawLetter>> = Vec::new();
    loop {
        match sc.peek() {
            Some('.') => {
                sc.bump();
                continue;
            }
            Some(')') | Some('|') | None => break,
            _ => parts.push(parse_star(sc)?),
        }
    }
    let mut it = parts.into_iter();
    match it.next() {
        None => Ok(Regex::Epsilon),
        Some(first) => Ok(it.fold(first, Regex::concat)),
    }
}

fn parse_star(sc: &mut Scanner) -> Result<Regex<RawLetter>, RegexParseError> {
    let mut re = parse_atom(sc)?;
    while sc.peek() == Some('*') {
        sc.bump();
        re = Regex::star(re);
    }
    Ok(re)
}

fn parse_atom(sc: &mut Scanner) -> Result<Regex<RawLetter>, RegexParseError> {
    match sc.peek() {
        Some('(') => {
            // A pair letter `(x,y)` or a group.
            let save = sc.pos;
            sc.bump();
            if let Some(a) = sc.ident() {
                if sc.peek() == Some(',') {
                    sc.bump();
                    let b = match sc.ident() {
                        Some(b) => b,
                        None => return sc.err("expected ident after ','"),
                    };
                    if sc.peek() != Some(')') {
                        return sc.err("expected ')' after pair letter");
                    }
                    sc.bump();
                    return Ok(Regex::letter(RawLetter::Pair(a, b)));
                }
            }
            sc.pos = save;
            sc.bump();
            let inner = parse_union(sc)?;
            if sc.peek() != Some(')') {
                return sc.err("expected ')'");
            }
            sc.bump();
            Ok(inner)
        }
        Some(c) if c.is_alphanumeric() => {
            sc.bump();
            Ok(Regex::letter(RawLetter::Plain(c.to_string())))
        }
        Some(c) => sc.err(format!("unexpected character '{c}'")),
        None => sc.err("unexpected end of input"),
    }
}

impl<L: fmt::Display> fmt::Display for Regex<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence: union < concat < star.
        fn go<L: fmt::Display>(re: &Regex<L>, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
            match re {
                Regex::Empty => write!(f, "(0|00)"), // no surface form; an unmatchable stand-in
                Regex::Epsilon => write!(f, "()"),
                Regex::Class(ls) => {
                    if ls.len() == 1 {
                        write!(f, "{}", ls[0])
                    } else {
                        write!(f, "(")?;
                        for (i, l) in ls.iter().enumerate() {
                            if i > 0 {
                                write!(f, "|")?;
                            }
                            write!(f, "{l}")?;
                        }
                        write!(f, ")")
                    }
                }
                Regex::Concat(a, b) => {
                    if prec > 1 {
                        write!(f, "(")?;
                    }
                    go(a, f, 1)?;
                    go(b, f, 1)?;
                    if prec > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                Regex::Union(a, b) => {
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
                Regex::Star(a) => {
                    go(a, f, 2)?;
                    write!(f, "*")
                }
            }
        }
        go(self, f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(s: &str) -> RawLetter {
        RawLetter::Plain(s.into())
    }

    #[test]
    fn parses_letters_and_star() {
        let re = parse_regex("a b*").unwrap();
        assert_eq!(
            re,
            Regex::concat(Regex::letter(plain("a")), Regex::star(Regex::letter(plain("b"))))
        );
    }

    #[test]
    fn parses_union_and_groups() {
        let re = parse_regex("(ab)*a").unwrap();
        let ab = Regex::concat(Regex::letter(plain("a")), Regex::letter(plain("b")));
        assert_eq!(re, Regex::concat(Regex::star(ab), Regex::letter(plain("a"))));
    }

    #[test]
    fn parses_pair_letters() {
        let re = parse_regex("(a,b0)(b,b0)").unwrap();
        assert_eq!(
            re,
            Regex::concat(
                Regex::letter(RawLetter::Pair("a".into(), "b0".into())),
                Regex::letter(RawLetter::Pair("b".into(), "b0".into()))
            )
        );
    }

    #[test]
    fn dot_is_concat() {
        assert_eq!(parse_regex("a.b").unwrap(), parse_regex("ab").unwrap());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_regex("a)(").is_err());
        assert!(parse_regex("*").is_err());
    }
}
