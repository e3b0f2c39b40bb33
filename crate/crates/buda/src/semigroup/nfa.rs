//! Nondeterministic finite automata over an indexed alphabet, with edges
//! labeled by letter classes (bitsets over alphabet indices).

use super::regex::Regex;

/// Bitset over alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LetterSet {
    words: Vec<u64>,
}

impl LetterSet {
    pub fn empty(n: usize) -> Self {
        LetterSet { words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn singleton(n: usize, i: usize) -> Self {
        let mut s = Self::empty(n);
        s.insert(i);
        s
    }

    pub fn from_iter(n: usize, iter: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for i in iter {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| wi * 64 + b))
    }
}

#[derive(Debug, Clone)]
pub struct NfaEdge {
    pub from: usize,
    pub letters: LetterSet,
    pub to: usize,
}

/// Epsilon-free NFA. Edges already fold the epsilon closure of their source,
/// and accepting states are closed under epsilon reachability.
#[derive(Debug, Clone)]
pub struct Nfa {
    pub n_states: usize,
    pub alphabet_len: usize,
    pub starts: Vec<usize>,
    pub accepts: Vec<usize>,
    pub edges: Vec<NfaEdge>,
}

impl Nfa {
    /// Thompson construction followed by epsilon elimination.
    pub fn from_regex(re: &Regex<usize>, alphabet_len: usize) -> Nfa {
        let mut b = Builder { n: 0, edges: Vec::new(), eps: Vec::new(), alphabet_len };
        let (s, f) = b.build(re);
        b.eliminate_eps(s, f)
    }

    pub fn accepts_empty_word(&self) -> bool {
        self.starts.iter().any(|s| self.accepts.contains(s))
    }

    /// Subset construction. Returns a complete DFA (with a sink state).
    pub fn determinize(&self) -> Dfa {
        use std::collections::HashMap;
        let mut subsets: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut order: Vec<Vec<usize>> = Vec::new();
        let mut trans: Vec<Vec<usize>> = Vec::new();

        let mut start: Vec<usize> = self.starts.clone();
        start.sort_unstable();
        start.dedup();
        subsets.insert(start.clone(), 0);
        order.push(start);

        let mut i = 0;
        while i < order.len() {
            let cur = order[i].clone();
            let mut row = Vec::with_capacity(self.alphabet_len);
            for c in 0..self.alphabet_len {
                let mut next: Vec<usize> = Vec::new();
                for e in &self.edges {
                    if e.letters.contains(c) && cur.binary_search(&e.from).is_ok() {
                        next.push(e.to);
                    }
                }
                next.sort_unstable();
                next.dedup();
                let id = *subsets.entry(next.clone()).or_insert_with(|| {
                    order.push(next);
                    order.len() - 1
                });
                row.push(id);
            }
            trans.push(row);
            i += 1;
        }

        let accept = order
            .iter()
            .map(|set| set.iter().any(|s| self.accepts.contains(s)))
            .collect();
        Dfa { n_states: order.len(), alphabet_len: self.alphabet_len, start: 0, accept, trans }
    }
}

struct Builder {
    n: usize,
    edges: Vec<NfaEdge>,
    eps: Vec<(usize, usize)>,
    alphabet_len: usize,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        self.n += 1;
        self.n - 1
    }

    fn build(&mut self, re: &Regex<usize>) -> (usize, usize) {
        match re {
            Regex::Empty => {
                let s = self.fresh();
                let f = self.fresh();
                (s, f)
            }
            Regex::Epsilon => {
                let s = self.fresh();
                let f = self.fresh();
                self.eps.push((s, f));
                (s, f)
            }
            Regex::Class(ls) => {
                let s = self.fresh();
                let f = self.fresh();
                let set = LetterSet::from_iter(self.alphabet_len, ls.iter().copied());
                self.edges.push(NfaEdge { from: s, letters: set, to: f });
                (s, f)
            }
            Regex::Concat(a, b) => {
                let (sa, fa) = self.build(a);
                let (sb, fb) = self.build(b);
                self.eps.push((fa, sb));
                (sa, fb)
            }
            Regex::Union(a, b) => {
                let s = self.fresh();
                let f = self.fresh();
                let (sa, fa) = self.build(a);
                let (sb, fb) = self.build(b);
                self.eps.push((s, sa));
                self.eps.push((s, sb));
                self.eps.push((fa, f));
                self.eps.push((fb, f));
                (s, f)
            }
            Regex::Star(a) => {
                let s = self.fresh();
                let f = self.fresh();
                let (sa, fa) = self.build(a);
                self.eps.push((s, sa));
                self.eps.push((fa, sa));
                self.eps.push((s, f));
                self.eps.push((fa, f));
                (s, f)
            }
        }
    }

    fn eliminate_eps(self, start: usize, accept: usize) -> Nfa {
        let n = self.n;
        // Epsilon closure by iterated expansion.
        let mut clo: Vec<Vec<bool>> = (0..n)
            .map(|s| {
                let mut v = vec![false; n];
                v[s] = true;
                v
            })
            .collect();
        let mut changed = true;
        while changed {
            changed = false;
            for &(a, b) in &self.eps {
                for s in 0..n {
                    if clo[s][a] && !clo[s][b] {
                        clo[s][b] = true;
                        changed = true;
                    }
                }
            }
        }

        let mut edges = Vec::new();
        for e in &self.edges {
            for s in 0..n {
                if clo[s][e.from] {
                    edges.push(NfaEdge { from: s, letters: e.letters.clone(), to: e.to });
                }
            }
        }
        let accepts = (0..n).filter(|&s| clo[s][accept]).collect();
        Nfa { n_states: n, alphabet_len: self.alphabet_len, starts: vec![start], accepts, edges }
    }
}

/// State-elimination translation back to a regex; used only for printing
/// machine-built tests in a re-parseable surface form.
pub fn nfa_to_regex(nfa: &Nfa) -> Regex<usize> {
    use Regex as R;

    fn simp_union(a: Regex<usize>, b: Regex<usize>) -> Regex<usize> {
        match (a, b) {
            (R::Empty, x) | (x, R::Empty) => x,
            (R::Class(mut x), R::Class(y)) => {
                x.extend(y);
                x.sort_unstable();
                x.dedup();
                R::Class(x)
            }
            (x, y) => {
                if x == y {
                    x
                } else {
                    R::union(x, y)
                }
            }
        }
    }

    fn simp_concat(a: Regex<usize>, b: Regex<usize>) -> Regex<usize> {
        match (a, b) {
            (R::Empty, _) | (_, R::Empty) => R::Empty,
            (R::Epsilon, x) | (x, R::Epsilon) => x,
            (x, y) => R::concat(x, y),
        }
    }

    fn simp_star(a: Regex<usize>) -> Regex<usize> {
        match a {
            R::Empty | R::Epsilon => R::Epsilon,
            R::Star(inner) => R::Star(inner),
            x => R::star(x),
        }
    }

    // Generalized NFA over states 0..n plus virtual start n and accept n+1.
    let n = nfa.n_states;
    let start = n;
    let accept = n + 1;
    let total = n + 2;
    let mut edge: Vec<Vec<Regex<usize>>> = vec![vec![R::Empty; total]; total];
    for e in &nfa.edges {
        let cls = R::Class(e.letters.iter().collect());
        let cur = std::mem::replace(&mut edge[e.from][e.to], R::Empty);
        edge[e.from][e.to] = simp_union(cur, cls);
    }
    for &s in &nfa.starts {
        edge[start][s] = R::Epsilon;
    }
    for &f in &nfa.accepts {
        let cur = std::mem::replace(&mut edge[f][accept], R::Empty);
        edge[f][accept] = simp_union(cur, R::Epsilon);
    }

    for k in 0..n {
        let loop_re = simp_star(edge[k][k].clone());
        for i in 0..total {
            if i == k {
                continue;
            }
            let via_in = edge[i][k].clone();
            if via_in == R::Empty {
                continue;
            }
            for j in 0..total {
                if j == k {
                    continue;
                }
                let via_out = edge[k][j].clone();
                if via_out == R::Empty {
                    continue;
                }
                let detour = simp_concat(simp_concat(via_in.clone(), loop_re.clone()), via_out);
                let cur = std::mem::replace(&mut edge[i][j], R::Empty);
                edge[i][j] = simp_union(cur, detour);
            }
        }
        for i in 0..total {
            edge[i][k] = R::Empty;
            edge[k][i] = R::Empty;
        }
    }
    edge[start][accept].clone()
}

/// Complete DFA over the same indexed alphabet.
#[derive(Debug, Clone)]
pub struct Dfa {
    pub n_states: usize,
    pub alphabet_len: usize,
    pub start: usize,
    pub accept: Vec<bool>,
    pub trans: Vec<Vec<usize>>, // [state][letter]
}

impl Dfa {
    pub fn run(&self, word: &[usize]) -> bool {
        let mut s = self.start;
        for &c in word {
            s = self.trans[s][c];
        }
        self.accept[s]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(i: usize) -> Regex<usize> {
        Regex::letter(i)
    }

    #[test]
    fn thompson_and_determinize() {
        // (ab)*a over {a=0, b=1}
        let re = Regex::concat(Regex::star(Regex::concat(l(0), l(1))), l(0));
        let nfa = Nfa::from_regex(&re, 2);
        let dfa = nfa.determinize();
        assert!(dfa.run(&[0]));
        assert!(dfa.run(&[0, 1, 0]));
        assert!(!dfa.run(&[]));
        assert!(!dfa.run(&[0, 1]));
        assert!(!dfa.run(&[1, 0]));
    }

    #[test]
    fn empty_word() {
        let re: Regex<usize> = Regex::star(Regex::letter(0));
        let nfa = Nfa::from_regex(&re, 1);
        assert!(nfa.accepts_empty_word());
        let nfa2 = Nfa::from_regex(&Regex::letter(0), 1);
        assert!(!nfa2.accepts_empty_word());
    }
}
