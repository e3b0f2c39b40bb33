//! Text format for automata.
//!
//! ```text
//! labels: a b
//! internal: b0 b1
//! states: q0 q1 q2
//! initial: q0
//! trans:
//! q0 & <"(a,b0)(b,b0)">= & !root -> keep(q1) & univ(q2)
//! q0 & eq -> accept
//! ```
//!
//! `&` and `,` both conjoin; `|` is surface disjunction and is compiled away
//! into several transitions. `!` negates a test. Down tests quote a regex and
//! take an optional `=` or `!=` mode suffix. A plain regex letter stands for
//! the label with any internal letter; `(a,b0)` is exact.


use super::{AutomatonError, BasicAction, BasicTest, Buda, DownMode, TestKind, Transition};
use crate::semigroup::nfa::Nfa;
use crate::semigroup::regex::{parse_regex, RawLetter, Regex};
use crate::semigroup::{CompileOptions, TestSuite};

#[derive(Debug, Clone)]
enum TExpr {
    Lit(BasicTest),
    Not(Box<TExpr>),
    And(Box<TExpr>, Box<TExpr>),
    Or(Box<TExpr>, Box<TExpr>),
    True,
}

#[derive(Debug, Clone)]
enum AExpr {
    Lit(BasicAction),
    And(Box<AExpr>, Box<AExpr>),
    Or(Box<AExpr>, Box<AExpr>),
}

fn dnf_tests(e: &TExpr, positive: bool) -> Vec<Vec<BasicTest>> {
    match e {
        TExpr::True => {
            if positive {
                vec![vec![]]
            } else {
                vec![] // no disjunct: unsatisfiable
            }
        }
        TExpr::Lit(t) => vec![vec![BasicTest { positive: t.positive == positive, kind: t.kind.clone() }]],
        TExpr::Not(inner) => dnf_tests(inner, !positive),
        TExpr::And(a, b) | TExpr::Or(a, b) => {
            let conj = matches!(e, TExpr::And(..)) == positive;
            let da = dnf_tests(a, positive);
            let db = dnf_tests(b, positive);
            if conj {
                let mut out = Vec::new();
                for x in &da {
                    for y in &db {
                        let mut v = x.clone();
                        v.extend(y.iter().cloned());
                        out.push(v);
                    }
                }
                out
            } else {
                let mut out = da;
                out.extend(db);
                out
            }
        }
    }
}

fn dnf_actions(e: &AExpr) -> Vec<Vec<BasicAction>> {
    match e {
        AExpr::Lit(a) => vec![vec![*a]],
        AExpr::And(a, b) => {
            let da = dnf_actions(a);
            let db = dnf_actions(b);
            let mut out = Vec::new();
            for x in &da {
                for y in &db {
                    let mut v = x.clone();
                    v.extend(y.iter().copied());
                    out.push(v);
                }
            }
            out
        }
        AExpr::Or(a, b) => {
            let mut out = dnf_actions(a);
            out.extend(dnf_actions(b));
            out
        }
    }
}

struct Names<'a> {
    labels: &'a [String],
    internals: &'a [String],
    states: &'a [String],
}

impl<'a> Names<'a> {
    fn resolve(&self, id: &str) -> Result<TestKind, AutomatonError> {
        let s = self.states.iter().position(|x| x == id);
        let l = self.labels.iter().position(|x| x == id);
        let b = self.internals.iter().position(|x| x == id);
        match (s, l, b) {
            (Some(q), None, None) => Ok(TestKind::State(q as u32)),
            (None, Some(a), None) => Ok(TestKind::Label(a as u32)),
            (None, None, Some(bi)) => Ok(TestKind::Internal(bi as u32)),
            (None, None, None) => Err(AutomatonError::Text(format!("unknown name '{id}'"))),
            _ => Err(AutomatonError::Text(format!("ambiguous name '{id}'"))),
        }
    }
}

struct LineParser<'a> {
    src: &'a [u8],
    pos: usize,
    names: &'a Names<'a>,
    suite: &'a mut TestSuite,
}

impl<'a> LineParser<'a> {
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

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, AutomatonError> {
        Err(AutomatonError::Text(format!("at byte {}: {}", self.pos, msg.into())))
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

    fn test_expr(&mut self) -> Result<TExpr, AutomatonError> {
        let mut e = self.test_conj()?;
        while self.eat('|') {
            let rhs = self.test_conj()?;
            e = TExpr::Or(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn test_conj(&mut self) -> Result<TExpr, AutomatonError> {
        let mut e = self.test_atom()?;
        loop {
            match self.peek() {
                Some('&') | Some(',') => {
                    self.pos += 1;
                    let rhs = self.test_atom()?;
                    e = TExpr::And(Box::new(e), Box::new(rhs));
                }
                _ => return Ok(e),
            }
        }
    }

    fn test_atom(&mut self) -> Result<TExpr, AutomatonError> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(TExpr::Not(Box::new(self.test_atom()?)))
            }
            Some('(') => {
                self.pos += 1;
                let e = self.test_expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some('<') => {
                self.pos += 1;
                self.skip_ws();
                if !self.eat('"') {
                    return self.err("expected '\"' after '<'");
                }
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos] != b'"' {
                    self.pos += 1;
                }
                if self.pos == self.src.len() {
                    return self.err("unterminated regex");
                }
                let regex_src = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                self.pos += 1;
                if !self.eat('>') {
                    return self.err("expected '>' after regex");
                }
                let mode = if self.eat('=') {
                    DownMode::Eq
                } else if self.peek() == Some('!') && self.src.get(self.pos + 1) == Some(&b'=') {
                    self.pos += 2;
                    DownMode::Neq
                } else {
                    DownMode::Any
                };
                let test = register_regex_test(self.suite, self.names, &regex_src)?;
                Ok(TExpr::Lit(BasicTest::pos(TestKind::Down { test, mode })))
            }
            _ => {
                let id = match self.ident() {
                    Some(id) => id,
                    None => return self.err("expected test"),
                };
                match id.as_str() {
                    "true" => Ok(TExpr::True),
                    "root" => Ok(TExpr::Lit(BasicTest::pos(TestKind::Root))),
                    "leaf" => Ok(TExpr::Lit(BasicTest::pos(TestKind::Leaf))),
                    "eq" => Ok(TExpr::Lit(BasicTest::pos(TestKind::EqData))),
                    _ => Ok(TExpr::Lit(BasicTest::pos(self.names.resolve(&id)?))),
                }
            }
        }
    }

    fn action_expr(&mut self) -> Result<AExpr, AutomatonError> {
        let mut e = self.action_conj()?;
        while self.eat('|') {
            let rhs = self.action_conj()?;
            e = AExpr::Or(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn action_conj(&mut self) -> Result<AExpr, AutomatonError> {
        let mut e = self.action_atom()?;
        loop {
            match self.peek() {
                Some('&') | Some(',') => {
                    self.pos += 1;
                    let rhs = self.action_atom()?;
                    e = AExpr::And(Box::new(e), Box::new(rhs));
                }
                _ => return Ok(e),
            }
        }
    }

    fn action_atom(&mut self) -> Result<AExpr, AutomatonError> {
        if self.eat('(') {
            let e = self.action_expr()?;
            if !self.eat(')') {
                return self.err("expected ')'");
            }
            return Ok(e);
        }
        let id = match self.ident() {
            Some(id) => id,
            None => return self.err("expected action"),
        };
        if id == "accept" {
            return Ok(AExpr::Lit(BasicAction::Accept));
        }
        if !self.eat('(') {
            return self.err(format!("expected '(' after action '{id}'"));
        }
        let target = match self.ident() {
            Some(t) => t,
            None => return self.err("expected state name"),
        };
        if !self.eat(')') {
            return self.err("expected ')'");
        }
        let q = self
            .names
            .states
            .iter()
            .position(|s| *s == target)
            .ok_or_else(|| AutomatonError::Text(format!("unknown state '{target}'")))? as u32;
        let act = match id.as_str() {
            "keep" => BasicAction::Keep(q),
            "store" => BasicAction::Store(q),
            "guess" => BasicAction::Guess(q),
            "univ" => BasicAction::Univ(q),
            _ => return self.err(format!("unknown action '{id}'")),
        };
        Ok(AExpr::Lit(act))
    }
}

/// Compiles one quoted regex into a machine test over the product alphabet.
/// A plain letter means "this label with any internal letter".
fn register_regex_test(
    suite: &mut TestSuite,
    names: &Names<'_>,
    src: &str,
) -> Result<crate::semigroup::TestId, AutomatonError> {
    let raw = parse_regex(src).map_err(|e| AutomatonError::Text(e.to_string()))?;
    let n_int = names.internals.len();
    let alphabet_len = names.labels.len() * n_int;
    let resolved: Regex<usize> = expand_raw(&raw, names)?;
    let nfa = Nfa::from_regex(&resolved, alphabet_len);
    Ok(suite.add_machine(nfa, src.to_string()))
}

fn expand_raw(re: &Regex<RawLetter>, names: &Names<'_>) -> Result<Regex<usize>, AutomatonError> {
    let n_int = names.internals.len();
    Ok(match re {
        Regex::Empty => Regex::Empty,
        Regex::Epsilon => Regex::Epsilon,
        Regex::Class(ls) => {
            let mut out = Vec::new();
            for l in ls {
                match l {
                    RawLetter::Plain(a) => {
                        let ai = names
                            .labels
                            .iter()
                            .position(|x| x == a)
                            .ok_or_else(|| AutomatonError::Text(format!("unknown label '{a}'")))?;
                        out.extend((0..n_int).map(|b| ai * n_int + b));
                    }
                    RawLetter::Pair(a, b) => {
                        let ai = names
                            .labels
                            .iter()
                            .position(|x| x == a)
                            .ok_or_else(|| AutomatonError::Text(format!("unknown label '{a}'")))?;
                        let bi = names
                            .internals
                            .iter()
                            .position(|x| x == b)
                            .ok_or_else(|| AutomatonError::Text(format!("unknown internal '{b}'")))?;
                        out.push(ai * n_int + bi);
                    }
                }
            }
            Regex::Class(out)
        }
        Regex::Concat(a, b) => Regex::Concat(
            Box::new(expand_raw(a, names)?),
            Box::new(expand_raw(b, names)?),
        ),
        Regex::Union(a, b) => Regex::Union(
            Box::new(expand_raw(a, names)?),
            Box::new(expand_raw(b, names)?),
        ),
        Regex::Star(a) => Regex::Star(Box::new(expand_raw(a, names)?)),
    })
}

/// Parses the automaton text format.
pub fn parse_buda(src: &str, opts: &CompileOptions) -> Result<Buda, AutomatonError> {
    let mut labels: Vec<String> = Vec::new();
    let mut internals: Vec<String> = Vec::new();
    let mut states: Vec<String> = Vec::new();
    let mut initial: Option<String> = None;
    let mut trans_lines: Vec<String> = Vec::new();
    let mut in_trans = false;

    for line in src.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_trans {
            trans_lines.push(line.to_string());
            continue;
        }
        if let Some(rest) = line.strip_prefix("labels:") {
            labels = rest.split_whitespace().map(String::from).collect();
        } else if let Some(rest) = line.strip_prefix("internal:") {
            internals = rest.split_whitespace().map(String::from).collect();
        } else if let Some(rest) = line.strip_prefix("states:") {
            states = rest.split_whitespace().map(String::from).collect();
        } else if let Some(rest) = line.strip_prefix("initial:") {
            initial = Some(rest.trim().to_string());
        } else if line == "trans:" {
            in_trans = true;
        } else {
            return Err(AutomatonError::Text(format!("unexpected line '{line}'")));
        }
    }

    if labels.is_empty() {
        return Err(AutomatonError::Text("missing labels".into()));
    }
    if internals.is_empty() {
        internals.push("b0".to_string());
    }
    if states.is_empty() {
        return Err(AutomatonError::Text("missing states".into()));
    }
    let initial = initial.ok_or_else(|| AutomatonError::Text("missing initial".into()))?;
    let init_id = states
        .iter()
        .position(|s| *s == initial)
        .ok_or_else(|| AutomatonError::Text(format!("unknown initial state '{initial}'")))? as u32;

    let mut suite = TestSuite::default();
    let mut transitions = Vec::new();
    {
        let names = Names { labels: &labels, internals: &internals, states: &states };
        for line in &trans_lines {
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| AutomatonError::Text(format!("transition lacks '->': {line}")))?;
            let texpr = {
                let mut p = LineParser { src: lhs.as_bytes(), pos: 0, names: &names, suite: &mut suite };
                let e = p.test_expr()?;
                p.skip_ws();
                if p.pos != lhs.len() {
                    return p.err("trailing input in test part");
                }
                e
            };
            let aexpr = {
                let mut p = LineParser { src: rhs.as_bytes(), pos: 0, names: &names, suite: &mut suite };
                let e = p.action_expr()?;
                p.skip_ws();
                if p.pos != rhs.len() {
                    return p.err("trailing input in action part");
                }
                e
            };
            for tconj in dnf_tests(&texpr, true) {
                for aconj in dnf_actions(&aexpr) {
                    transitions.push(Transition::new(tconj.clone(), aconj));
                }
            }
        }
    }
    Buda::new(labels, internals, states, init_id, transitions, suite, opts)
}

fn show_test(aut: &Buda, t: &BasicTest, descs: &[String]) -> String {
    let body = match &t.kind {
        TestKind::State(q) => aut.states()[*q as usize].clone(),
        TestKind::Label(a) => aut.labels()[*a as usize].clone(),
        TestKind::Internal(b) => aut.internals()[*b as usize].clone(),
        TestKind::InternalIn(set) => {
            let parts: Vec<&str> = set.iter().map(|b| aut.internals()[*b as usize].as_str()).collect();
            format!("({})", parts.join("|"))
        }
        TestKind::Root => "root".into(),
        TestKind::Leaf => "leaf".into(),
        TestKind::EqData => "eq".into(),
        TestKind::Down { test, mode } => {
            let suffix = match mode {
                DownMode::Eq => "=",
                DownMode::Neq => "!=",
                DownMode::Any => "",
            };
            format!("<\"{}\">{}", descs[*test as usize], suffix)
        }
    };
    if t.positive {
        body
    } else if matches!(t.kind, TestKind::InternalIn(_)) {
        format!("!{body}")
    } else {
        format!("!({body})")
    }
}

fn show_action(aut: &Buda, a: &BasicAction) -> String {
    match a {
        BasicAction::Accept => "accept".into(),
        BasicAction::Keep(q) => format!("keep({})", aut.states()[*q as usize]),
        BasicAction::Store(q) => format!("store({})", aut.states()[*q as usize]),
        BasicAction::Guess(q) => format!("guess({})", aut.states()[*q as usize]),
        BasicAction::Univ(q) => format!("univ({})", aut.states()[*q as usize]),
    }
}

/// Renders the automaton in the text format; regenerates a regex for tests
/// that were built from machines without a surface spelling.
pub fn print_buda(aut: &Buda) -> String {
    let descs: Vec<String> = (0..aut.rec().test_count())
        .map(|t| {
            let desc = aut.rec().test_desc(t as u32);
            if !desc.is_empty() {
                desc.to_string()
            } else {
                regen_regex(aut, t as u32)
            }
        })
        .collect();

    let mut out = String::new();
    out.push_str(&format!("labels: {}\n", aut.labels().join(" ")));
    out.push_str(&format!("internal: {}\n", aut.internals().join(" ")));
    out.push_str(&format!("states: {}\n", aut.states().join(" ")));
    out.push_str(&format!("initial: {}\n", aut.states()[aut.initial() as usize]));
    out.push_str("trans:\n");
    for tr in aut.transitions() {
        let tests: Vec<String> = tr.test.iter().map(|t| show_test(aut, t, &descs)).collect();
        let actions: Vec<String> = tr.action.iter().map(|a| show_action(aut, a)).collect();
        let lhs = if tests.is_empty() { "true".to_string() } else { tests.join(" & ") };
        out.push_str(&format!("{} -> {}\n", lhs, actions.join(" & ")));
    }
    out
}

fn regen_regex(aut: &Buda, test: crate::semigroup::TestId) -> String {
    use crate::semigroup::TestKindSrc;
    let src = &aut.suite().tests[test as usize];
    let re: Regex<usize> = match &src.kind {
        TestKindSrc::LetterClass(ls) => Regex::Class(ls.iter().collect()),
        TestKindSrc::AnyLong => {
            // Any word of length >= 2.
            let n = aut.labels().len() * aut.internals().len();
            let any = Regex::Class((0..n).collect::<Vec<_>>());
            Regex::concat(any.clone(), Regex::concat(any.clone(), Regex::star(any)))
        }
        TestKindSrc::Machine { space, starts, accepts } => {
            let mut nfa = aut.suite().spaces[*space].clone();
            nfa.starts = starts.clone();
            nfa.accepts = accepts.clone();
            crate::semigroup::nfa::nfa_to_regex(&nfa)
        }
    };
    let shown = re.map(&mut |i: &usize| {
        let l = aut.letter_of_id(*i as u32);
        RawLetter::Pair(
            aut.labels()[l.label as usize].clone(),
            aut.internals()[l.internal as usize].clone(),
        )
    });
    format!("{shown}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = r#"
labels: a b
internal: b0
states: q0 q1
initial: q0
trans:
q0 & <"(a,b0)(b,b0)">= & !(root) -> keep(q1) & univ(q1)
q0 & eq -> accept
q1 -> accept
"#;

    #[test]
    fn parse_and_reprint() {
        let aut = parse_buda(SRC, &CompileOptions::default()).unwrap();
        assert_eq!(aut.labels(), &["a", "b"]);
        assert_eq!(aut.transitions().len(), 3);
        let printed = print_buda(&aut);
        let aut2 = parse_buda(&printed, &CompileOptions::default()).unwrap();
        assert_eq!(aut.transitions(), aut2.transitions());
    }

    #[test]
    fn disjunction_expands() {
        let src = r#"
labels: a
states: q0
initial: q0
trans:
q0 & (root | leaf) -> accept | keep(q0)
"#;
        let aut = parse_buda(src, &CompileOptions::default()).unwrap();
        // 2 test disjuncts x 2 action disjuncts
        assert_eq!(aut.transitions().len(), 4);
    }

    #[test]
    fn negated_disjunction_becomes_conjunction() {
        let src = r#"
labels: a
states: q0
initial: q0
trans:
q0 & !(root | leaf) -> accept
"#;
        let aut = parse_buda(src, &CompileOptions::default()).unwrap();
        assert_eq!(aut.transitions().len(), 1);
        assert_eq!(aut.transitions()[0].test.len(), 3);
    }

    #[test]
    fn plain_regex_letter_is_label_class() {
        let src = r#"
labels: a b
internal: b0 b1
states: q0
initial: q0
trans:
q0 & <"ab">= -> accept
"#;
        let aut = parse_buda(src, &CompileOptions::default()).unwrap();
        // "ab" should accept any (a,*) then (b,*): check via the recognizer.
        let rec = aut.rec();
        let w = [aut.letter_id(0, 1), aut.letter_id(1, 0)];
        assert!(rec.accepts(0, &w).unwrap());
        let w2 = [aut.letter_id(1, 0), aut.letter_id(0, 1)];
        assert!(!rec.accepts(0, &w2).unwrap());
    }

    #[test]
    fn unknown_name_is_an_error() {
        let src = "labels: a\nstates: q0\ninitial: q0\ntrans:\nq0 & zz -> accept\n";
        assert!(parse_buda(src, &CompileOptions::default()).is_err());
    }
}
