//! Finite-semigroup recognizers for regular word languages.
//!
//! A recognizer packages one finite semigroup, a homomorphism from nonempty
//! words over the alphabet, and one accepting subset per registered test.
//! Elements are transition relations of a joint NFA state space, tagged so
//! that the image of every one-letter word is distinct from the image of any
//! longer word (and from every other letter). The tag makes the
//! letter-separation normal form hold by construction instead of by repair.

pub mod nfa;
pub mod regex;

use std::collections::HashMap;
use std::fmt;

use nfa::{LetterSet, Nfa};
use regex::Regex;

pub type ElemId = u32;
pub type TestId = u32;
pub type LetterId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Letter(LetterId),
    Long,
}

/// Dense boolean matrix; rows are bitsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    wpr: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zero(n: usize) -> Self {
        let wpr = n.div_ceil(64).max(1);
        BitMatrix { n, wpr, bits: vec![0; wpr * n] }
    }

    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.wpr + j / 64] |= 1 << (j % 64);
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.wpr + j / 64] & (1 << (j % 64)) != 0
    }

    /// Relational composition: `(i,k) in out` iff exists j with
    /// `(i,j) in self` and `(j,k) in other`.
    pub fn compose(&self, other: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zero(self.n);
        for i in 0..self.n {
            let row = &self.bits[i * self.wpr..(i + 1) * self.wpr];
            let out_row_start = i * out.wpr;
            for (w, &word) in row.iter().enumerate() {
                let mut bitsword = word;
                while bitsword != 0 {
                    let b = bitsword.trailing_zeros() as usize;
                    bitsword &= bitsword - 1;
                    let j = w * 64 + b;
                    let other_row = &other.bits[j * other.wpr..(j + 1) * other.wpr];
                    for (k, &ow) in other_row.iter().enumerate() {
                        out.bits[out_row_start + k] |= ow;
                    }
                }
            }
        }
        out
    }
}

/// How a test's language is described over the joint state space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestKindSrc {
    /// Words accepted by a shared machine between the given state sets.
    Machine { space: usize, starts: Vec<usize>, accepts: Vec<usize> },
    /// Exactly the one-letter words whose letter lies in the set.
    LetterClass(LetterSet),
    /// Exactly the words of length at least two.
    AnyLong,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSrc {
    pub kind: TestKindSrc,
    pub desc: String,
}

/// Machine spaces plus the tests defined over them. This is the durable
/// description an automaton keeps; the recognizer is compiled from it and
/// recompiled whenever the alphabet changes.
#[derive(Debug, Clone, Default)]
pub struct TestSuite {
    pub spaces: Vec<Nfa>,
    pub tests: Vec<TestSrc>,
}

impl TestSuite {
    pub fn add_machine(&mut self, nfa: Nfa, desc: impl Into<String>) -> TestId {
        let space = self.spaces.len();
        let starts = nfa.starts.clone();
        let accepts = nfa.accepts.clone();
        self.spaces.push(nfa);
        self.tests.push(TestSrc {
            kind: TestKindSrc::Machine { space, starts, accepts },
            desc: desc.into(),
        });
        (self.tests.len() - 1) as TestId
    }

    pub fn add_shared(
        &mut self,
        space: usize,
        starts: Vec<usize>,
        accepts: Vec<usize>,
        desc: impl Into<String>,
    ) -> TestId {
        self.tests.push(TestSrc { kind: TestKindSrc::Machine { space, starts, accepts }, desc: desc.into() });
        (self.tests.len() - 1) as TestId
    }

    /// Registers a one-letter class test, reusing an existing identical one.
    pub fn add_letter_class(&mut self, letters: LetterSet, desc: impl Into<String>) -> TestId {
        for (i, t) in self.tests.iter().enumerate() {
            if let TestKindSrc::LetterClass(ls) = &t.kind {
                if *ls == letters {
                    return i as TestId;
                }
            }
        }
        self.tests.push(TestSrc { kind: TestKindSrc::LetterClass(letters), desc: desc.into() });
        (self.tests.len() - 1) as TestId
    }

    pub fn add_any_long(&mut self, desc: impl Into<String>) -> TestId {
        for (i, t) in self.tests.iter().enumerate() {
            if matches!(t.kind, TestKindSrc::AnyLong) {
                return i as TestId;
            }
        }
        self.tests.push(TestSrc { kind: TestKindSrc::AnyLong, desc: desc.into() });
        (self.tests.len() - 1) as TestId
    }

    /// Rewrites every letter reference when the alphabet is re-indexed.
    /// `expansion[old]` lists the new indices standing for the old letter.
    pub fn lift_alphabet(&mut self, expansion: &[Vec<usize>], new_len: usize) {
        let lift = |ls: &LetterSet| -> LetterSet {
            LetterSet::from_iter(new_len, ls.iter().flat_map(|old| expansion[old].iter().copied()))
        };
        for sp in &mut self.spaces {
            sp.alphabet_len = new_len;
            for e in &mut sp.edges {
                e.letters = lift(&e.letters);
            }
        }
        for t in &mut self.tests {
            if let TestKindSrc::LetterClass(ls) = &mut t.kind {
                *ls = lift(ls);
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompileOptions {
    pub max_elements: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { max_elements: 50_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemigroupError {
    #[error("semigroup element budget exceeded (cap {cap})")]
    TooManyElements { cap: usize },
    #[error("homomorphism applied to the empty word")]
    EmptyWord,
    #[error("letter index {0} outside the recognizer alphabet")]
    UnknownLetter(u32),
    #[error("unknown test id {0}")]
    UnknownTest(u32),
    #[error("regex letter {0} not in the alphabet")]
    UnresolvedLetter(String),
}

#[derive(Debug, Clone)]
struct Element {
    tag: Tag,
    class: u32,
}

/// Finite semigroup, homomorphism and per-test accepting subsets.
#[derive(Debug, Clone)]
pub struct Recognizer<L> {
    alphabet: Vec<L>,
    classes: Vec<BitMatrix>,
    class_index: HashMap<BitMatrix, u32>,
    elements: Vec<Element>,
    long_by_class: HashMap<u32, ElemId>,
    tests: Vec<TestSrc>,
    /// `accepting[test]` is a bitset over elements.
    accepting: Vec<Vec<u64>>,
}

fn bit_get(v: &[u64], i: usize) -> bool {
    v[i / 64] & (1 << (i % 64)) != 0
}

fn bit_set(v: &mut [u64], i: usize) {
    v[i / 64] |= 1 << (i % 64);
}

impl<L: Clone + Eq + Ord + fmt::Display> Recognizer<L> {
    /// Compiles the joint machine suite into a recognizer.
    pub fn compile(
        alphabet: Vec<L>,
        suite: &TestSuite,
        opts: &CompileOptions,
    ) -> Result<Recognizer<L>, SemigroupError> {
        assert!(!alphabet.is_empty(), "recognizer alphabet must be nonempty");
        // Lay the machine spaces side by side.
        let mut offset = Vec::with_capacity(suite.spaces.len());
        let mut n_states = 0usize;
        for sp in &suite.spaces {
            offset.push(n_states);
            n_states += sp.n_states;
        }
        n_states = n_states.max(1);

        let mut letter_rel: Vec<BitMatrix> = (0..alphabet.len()).map(|_| BitMatrix::zero(n_states)).collect();
        for (si, sp) in suite.spaces.iter().enumerate() {
            for e in &sp.edges {
                for c in e.letters.iter() {
                    letter_rel[c].set(offset[si] + e.from, offset[si] + e.to);
                }
            }
        }

        let _ = n_states;
        let mut rec = Recognizer {
            alphabet,
            classes: Vec::new(),
            class_index: HashMap::new(),
            elements: Vec::new(),
            long_by_class: HashMap::new(),
            tests: suite
                .tests
                .iter()
                .map(|t| {
                    let kind = match &t.kind {
                        TestKindSrc::Machine { space, starts, accepts } => TestKindSrc::Machine {
                            space: 0,
                            starts: starts.iter().map(|s| s + offset[*space]).collect(),
                            accepts: accepts.iter().map(|s| s + offset[*space]).collect(),
                        },
                        other => other.clone(),
                    };
                    TestSrc { kind, desc: t.desc.clone() }
                })
                .collect(),
            accepting: Vec::new(),
        };

        // One element per letter, then the closure of all longer products.
        for c in 0..rec.alphabet.len() {
            let class = rec.intern_class(letter_rel[c].clone());
            rec.elements.push(Element { tag: Tag::Letter(c as LetterId), class });
        }
        let letter_classes: Vec<u32> = rec.elements.iter().map(|e| e.class).collect();
        let mut distinct_letter_classes: Vec<u32> = letter_classes.clone();
        distinct_letter_classes.sort_unstable();
        distinct_letter_classes.dedup();

        let mut worklist: Vec<u32> = Vec::new();
        for &a in &distinct_letter_classes {
            for &b in &distinct_letter_classes {
                let m = rec.classes[a as usize].compose(&rec.classes[b as usize]);
                let class = rec.intern_class(m);
                if let std::collections::hash_map::Entry::Vacant(e) = rec.long_by_class.entry(class) {
                    if rec.elements.len() >= opts.max_elements {
                        return Err(SemigroupError::TooManyElements { cap: opts.max_elements });
                    }
                    e.insert(rec.elements.len() as ElemId);
                    rec.elements.push(Element { tag: Tag::Long, class });
                    worklist.push(class);
                }
            }
        }
        while let Some(cls) = worklist.pop() {
            for &b in &distinct_letter_classes {
                let m = rec.classes[cls as usize].compose(&rec.classes[b as usize]);
                let class = rec.intern_class(m);
                if let std::collections::hash_map::Entry::Vacant(e) = rec.long_by_class.entry(class) {
                    if rec.elements.len() >= opts.max_elements {
                        return Err(SemigroupError::TooManyElements { cap: opts.max_elements });
                    }
                    e.insert(rec.elements.len() as ElemId);
                    rec.elements.push(Element { tag: Tag::Long, class });
                    worklist.push(class);
                }
            }
        }

        rec.accepting = (0..rec.tests.len()).map(|t| rec.compute_accepting(t as TestId)).collect();
        Ok(rec)
    }

    fn intern_class(&mut self, m: BitMatrix) -> u32 {
        if let Some(&c) = self.class_index.get(&m) {
            return c;
        }
        let c = self.classes.len() as u32;
        self.classes.push(m.clone());
        self.class_index.insert(m, c);
        c
    }

    fn compute_accepting(&self, test: TestId) -> Vec<u64> {
        let mut bits = vec![0u64; self.elements.len().div_ceil(64).max(1)];
        let src = &self.tests[test as usize];
        for (i, e) in self.elements.iter().enumerate() {
            let ok = match &src.kind {
                TestKindSrc::Machine { starts, accepts, .. } => {
                    let m = &self.classes[e.class as usize];
                    starts.iter().any(|&s| accepts.iter().any(|&f| m.get(s, f)))
                }
                TestKindSrc::LetterClass(ls) => match e.tag {
                    Tag::Letter(c) => ls.contains(c as usize),
                    Tag::Long => false,
                },
                TestKindSrc::AnyLong => matches!(e.tag, Tag::Long),
            };
            if ok {
                bit_set(&mut bits, i);
            }
        }
        bits
    }

    pub fn alphabet(&self) -> &[L] {
        &self.alphabet
    }

    pub fn letter_index(&self, l: &L) -> Option<LetterId> {
        self.alphabet.iter().position(|x| x == l).map(|i| i as LetterId)
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn test_count(&self) -> usize {
        self.tests.len()
    }

    pub fn test_desc(&self, test: TestId) -> &str {
        &self.tests[test as usize].desc
    }

    pub fn tag(&self, e: ElemId) -> Tag {
        self.elements[e as usize].tag
    }

    /// The image of the one-letter word `c`.
    pub fn letter_image(&self, c: LetterId) -> ElemId {
        debug_assert!((c as usize) < self.alphabet.len());
        c as ElemId
    }

    /// Semigroup product.
    pub fn product(&self, a: ElemId, b: ElemId) -> ElemId {
        let ca = self.elements[a as usize].class as usize;
        let cb = self.elements[b as usize].class as usize;
        let m = self.classes[ca].compose(&self.classes[cb]);
        let class = *self.class_index.get(&m).expect("semigroup closed under product");
        self.long_by_class[&class]
    }

    /// Folds the homomorphism over a nonempty word.
    pub fn hom_eval(&self, word: &[LetterId]) -> Result<ElemId, SemigroupError> {
        match word {
            [] => Err(SemigroupError::EmptyWord),
            [c] => {
                if (*c as usize) >= self.alphabet.len() {
                    return Err(SemigroupError::UnknownLetter(*c));
                }
                Ok(self.letter_image(*c))
            }
            [c, rest @ ..] => {
                if (*c as usize) >= self.alphabet.len() {
                    return Err(SemigroupError::UnknownLetter(*c));
                }
                let mut m = self.classes[self.elements[*c as usize].class as usize].clone();
                for &d in rest {
                    if (d as usize) >= self.alphabet.len() {
                        return Err(SemigroupError::UnknownLetter(d));
                    }
                    m = m.compose(&self.classes[self.elements[d as usize].class as usize]);
                }
                let class = *self.class_index.get(&m).expect("semigroup closed under product");
                Ok(self.long_by_class[&class])
            }
        }
    }

    pub fn test_accepts_elem(&self, test: TestId, e: ElemId) -> bool {
        bit_get(&self.accepting[test as usize], e as usize)
    }

    /// Whether the word (nonempty) lies in the test's language.
    pub fn accepts(&self, test: TestId, word: &[LetterId]) -> Result<bool, SemigroupError> {
        if (test as usize) >= self.tests.len() {
            return Err(SemigroupError::UnknownTest(test));
        }
        let e = self.hom_eval(word)?;
        Ok(self.test_accepts_elem(test, e))
    }

    pub fn accepting_elems(&self, test: TestId) -> impl Iterator<Item = ElemId> + '_ {
        let bits = &self.accepting[test as usize];
        (0..self.elements.len()).filter(move |&i| bit_get(bits, i)).map(|i| i as ElemId)
    }

    /// Letter-separation check: letter images are pairwise distinct and no
    /// product of two or more letters equals a letter image.
    pub fn letter_separation_holds(&self) -> bool {
        for i in 0..self.alphabet.len() {
            for j in 0..self.alphabet.len() {
                if i != j && self.letter_image(i as u32) == self.letter_image(j as u32) {
                    return false;
                }
            }
        }
        // Every product carries the Long tag, which no letter carries.
        for (i, e) in self.elements.iter().enumerate() {
            match e.tag {
                Tag::Letter(c) => {
                    if c as usize != i {
                        return false;
                    }
                }
                Tag::Long => {}
            }
        }
        for a in 0..self.elements.len().min(64) {
            for b in 0..self.elements.len().min(64) {
                if matches!(self.tag(self.product(a as ElemId, b as ElemId)), Tag::Letter(_)) {
                    return false;
                }
            }
        }
        true
    }

    /// Associativity of the product; exhaustive when small, sampled otherwise.
    pub fn associativity_holds(&self, samples: usize, rng: &mut crate::rng::Rng) -> bool {
        let n = self.elements.len();
        let check = |x: ElemId, y: ElemId, z: ElemId, rec: &Self| {
            rec.product(rec.product(x, y), z) == rec.product(x, rec.product(y, z))
        };
        if n <= 64 {
            for x in 0..n as ElemId {
                for y in 0..n as ElemId {
                    for z in 0..n as ElemId {
                        if !check(x, y, z, self) {
                            return false;
                        }
                    }
                }
            }
            true
        } else {
            (0..samples).all(|_| {
                let x = rng.below(n) as ElemId;
                let y = rng.below(n) as ElemId;
                let z = rng.below(n) as ElemId;
                check(x, y, z, self)
            })
        }
    }

    /// Renders an element: letters by their spelling, longer products by id.
    pub fn elem_name(&self, e: ElemId) -> String {
        match self.elements[e as usize].tag {
            Tag::Letter(c) => format!("{}", self.alphabet[c as usize]),
            Tag::Long => format!("#{e}"),
        }
    }
}

/// Compiles a batch of regexes over a shared alphabet into one recognizer;
/// the i-th regex becomes test id i.
pub fn compile_regexes<L: Clone + Eq + Ord + fmt::Display>(
    alphabet: Vec<L>,
    exprs: &[Regex<L>],
    opts: &CompileOptions,
) -> Result<Recognizer<L>, SemigroupError> {
    let mut suite = TestSuite::default();
    for re in exprs {
        let resolved: Regex<usize> = re.try_map(&mut |l: &L| {
            alphabet
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| SemigroupError::UnresolvedLetter(l.to_string()))
        })?;
        let nfa = Nfa::from_regex(&resolved, alphabet.len());
        suite.add_machine(nfa, format!("{re}"));
    }
    Recognizer::compile(alphabet, &suite, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn rec_over_ab(srcs: &[&str]) -> Recognizer<char> {
        let alphabet = vec!['a', 'b'];
        let exprs: Vec<Regex<char>> = srcs
            .iter()
            .map(|s| {
                regex::parse_regex(s).unwrap().map(&mut |l| match l {
                    regex::RawLetter::Plain(p) => p.chars().next().unwrap(),
                    _ => panic!("plain letters only"),
                })
            })
            .collect();
        compile_regexes(alphabet, &exprs, &CompileOptions::default()).unwrap()
    }

    fn word(s: &str) -> Vec<LetterId> {
        s.chars().map(|c| if c == 'a' { 0 } else { 1 }).collect()
    }

    #[test]
    fn single_letter_language() {
        let rec = rec_over_ab(&["a"]);
        assert!(rec.accepts(0, &word("a")).unwrap());
        assert!(!rec.accepts(0, &word("b")).unwrap());
        assert!(!rec.accepts(0, &word("aa")).unwrap());
    }

    #[test]
    fn a_then_bs() {
        let rec = rec_over_ab(&["a b*"]);
        assert!(rec.accepts(0, &word("abb")).unwrap());
        assert!(!rec.accepts(0, &word("ba")).unwrap());
    }

    #[test]
    fn shared_semigroup_two_tests() {
        let rec = rec_over_ab(&["a", "a b*"]);
        assert!(rec.accepts(0, &word("a")).unwrap());
        assert!(rec.accepts(1, &word("a")).unwrap());
        assert!(rec.accepts(1, &word("ab")).unwrap());
        assert!(!rec.accepts(0, &word("ab")).unwrap());
    }

    #[test]
    fn homomorphism_law() {
        let rec = rec_over_ab(&["(ab)*a"]);
        let mut rng = Rng::new(9);
        for _ in 0..200 {
            let u: Vec<LetterId> = (0..1 + rng.below(4)).map(|_| rng.below(2) as u32).collect();
            let v: Vec<LetterId> = (0..1 + rng.below(4)).map(|_| rng.below(2) as u32).collect();
            let uv: Vec<LetterId> = u.iter().chain(v.iter()).copied().collect();
            let lhs = rec.hom_eval(&uv).unwrap();
            let rhs = rec.product(rec.hom_eval(&u).unwrap(), rec.hom_eval(&v).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn empty_word_rejected() {
        let rec = rec_over_ab(&["a"]);
        assert_eq!(rec.hom_eval(&[]), Err(SemigroupError::EmptyWord));
    }

    #[test]
    fn letter_separation_and_associativity() {
        let rec = rec_over_ab(&["(ab)*a", "b a*"]);
        assert!(rec.letter_separation_holds());
        let mut rng = Rng::new(3);
        assert!(rec.associativity_holds(1000, &mut rng));
    }

    #[test]
    fn letter_class_and_any_long_tests() {
        let alphabet = vec!['a', 'b', 'c'];
        let mut suite = TestSuite::default();
        let t_ab = suite.add_letter_class(LetterSet::from_iter(3, [0usize, 1]), "(a|b)");
        let t_long = suite.add_any_long("..+");
        let rec = Recognizer::compile(alphabet, &suite, &CompileOptions::default()).unwrap();
        assert!(rec.accepts(t_ab, &[0]).unwrap());
        assert!(rec.accepts(t_ab, &[1]).unwrap());
        assert!(!rec.accepts(t_ab, &[2]).unwrap());
        assert!(!rec.accepts(t_ab, &[0, 1]).unwrap());
        assert!(!rec.accepts(t_long, &[2]).unwrap());
        assert!(rec.accepts(t_long, &[2, 2]).unwrap());
    }

    #[test]
    fn element_cap_is_honest() {
        let alphabet: Vec<char> = "abcdefgh".chars().collect();
        let exprs: Vec<Regex<char>> = alphabet
            .iter()
            .map(|&c| Regex::concat(Regex::star(Regex::letter(c)), Regex::letter(c)))
            .collect();
        let res = compile_regexes(alphabet, &exprs, &CompileOptions { max_elements: 4 });
        assert_eq!(res.unwrap_err(), SemigroupError::TooManyElements { cap: 4 });
    }
}
