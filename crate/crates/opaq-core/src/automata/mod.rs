//! Omega-automata over run alphabets and observation alphabets.
//!
//! Deterministic automata carry state-based acceptance (Buchi, co-Buchi, or
//! min-even parity); nondeterministic automata carry transition marks, which
//! survive the epsilon-elimination inside image constructions where
//! state-based acceptance would not.  Ultimately periodic words — lassos —
//! are the finite witness class: two omega-regular languages over a small
//! alphabet agree iff they agree on all lassos, so tests and oracles
//! enumerate lassos and the emptiness checks return them as witnesses.

mod determinize;
mod hoa;
mod miyano;

pub use determinize::{determinize_nba, nba_of_parity};
pub use hoa::{parse_hoa, print_hoa, HoaAutomaton};
pub use miyano::miyano_hayashi;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::LabeledMdp;
use crate::{Error, Result};

/// One symbol of an automaton alphabet.
///
/// Run alphabets interleave the states of a model with its (action, label)
/// steps; observation alphabets are plain letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sym {
    /// A model state, read when the run arrives there.
    State(String),
    /// An (action, label) step.
    Step(String, String),
    /// A plain letter (observation alphabets, test alphabets).
    Letter(String),
}

impl std::fmt::Display for Sym {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sym::State(q) => write!(f, "{q}"),
            Sym::Step(a, l) => write!(f, "({a},{l})"),
            Sym::Letter(x) => write!(f, "{x}"),
        }
    }
}

/// An ordered, indexed alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    syms: Vec<Sym>,
    index: BTreeMap<Sym, usize>,
}

impl Alphabet {
    pub fn new(syms: Vec<Sym>) -> Result<Alphabet> {
        let index: BTreeMap<Sym, usize> =
            syms.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        if index.len() != syms.len() {
            return Err(Error::InvalidInput("alphabet contains a duplicate symbol".into()));
        }
        Ok(Alphabet { syms, index })
    }

    /// Plain-letter alphabet, for observation languages and tests.
    pub fn letters<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Alphabet> {
        Alphabet::new(names.into_iter().map(|n| Sym::Letter(n.into())).collect())
    }

    /// The run alphabet of a model: every state plus every (action, label)
    /// pair, in sorted order.
    pub fn run_alphabet(mdp: &LabeledMdp) -> Alphabet {
        let mut syms: Vec<Sym> = mdp
            .state_names()
            .iter()
            .map(|q| Sym::State(q.clone()))
            .collect();
        for a in mdp.action_names() {
            for l in mdp.label_names() {
                syms.push(Sym::Step(a.clone(), l.clone()));
            }
        }
        Alphabet::new(syms).expect("model name tables are duplicate-free")
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn sym(&self, i: usize) -> &Sym {
        &self.syms[i]
    }

    pub fn syms(&self) -> &[Sym] {
        &self.syms
    }

    pub fn index_of(&self, s: &Sym) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn state_symbol(&self, name: &str) -> Option<usize> {
        self.index_of(&Sym::State(name.into()))
    }

    pub fn step_symbol(&self, action: &str, label: &str) -> Option<usize> {
        self.index_of(&Sym::Step(action.into(), label.into()))
    }

    pub fn letter(&self, name: &str) -> Option<usize> {
        self.index_of(&Sym::Letter(name.into()))
    }
}

/// An ultimately periodic word `stem . cycle^omega` over some alphabet,
/// stored as symbol indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LassoWord {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl LassoWord {
    pub fn new(stem: Vec<usize>, cycle: Vec<usize>) -> LassoWord {
        assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
        LassoWord { stem, cycle }
    }

    /// The canonical representation of the omega-word: the cycle is reduced
    /// to its primitive root and the stem absorbs nothing it does not need.
    /// Two lassos denote the same omega-word iff their canonical forms are
    /// structurally equal.
    pub fn canonical(&self) -> LassoWord {
        let mut stem = self.stem.clone();
        let mut cycle = primitive_root(&self.cycle);
        while let Some(&last) = stem.last() {
            if last == *cycle.last().unwrap() {
                stem.pop();
                cycle.rotate_right(1);
            } else {
                break;
            }
        }
        LassoWord { stem, cycle }
    }

    pub fn same_word(&self, other: &LassoWord) -> bool {
        self.canonical() == other.canonical()
    }

    /// The symbol at position `i` of the infinite word.
    pub fn at(&self, i: usize) -> usize {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        let part = |syms: &[usize]| {
            syms.iter()
                .map(|&s| alphabet.sym(s).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        if self.stem.is_empty() {
            format!("( {} )^w", part(&self.cycle))
        } else {
            format!("{} ( {} )^w", part(&self.stem), part(&self.cycle))
        }
    }
}

fn primitive_root(cycle: &[usize]) -> Vec<usize> {
    let n = cycle.len();
    for p in 1..=n {
        if n % p == 0 && cycle.iter().enumerate().all(|(i, &s)| s == cycle[i % p]) {
            return cycle[..p].to_vec();
        }
    }
    unreachable!("every word is its own period")
}

/// State-based acceptance of a deterministic automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Acceptance {
    /// Accept iff some marked state is visited infinitely often.
    Buchi(Vec<bool>),
    /// Accept iff marked states are visited finitely often.
    CoBuchi(Vec<bool>),
    /// Accept iff the minimum priority visited infinitely often is even.
    Parity(Vec<u32>),
}

impl Acceptance {
    pub fn len(&self) -> usize {
        match self {
            Acceptance::Buchi(v) | Acceptance::CoBuchi(v) => v.len(),
            Acceptance::Parity(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Does the set of infinitely-visited states `inf` satisfy this
    /// condition?
    pub fn satisfied_by(&self, inf: &BTreeSet<usize>) -> bool {
        match self {
            Acceptance::Buchi(f) => inf.iter().any(|&q| f[q]),
            Acceptance::CoBuchi(f) => inf.iter().all(|&q| !f[q]),
            Acceptance::Parity(pr) => {
                inf.iter().map(|&q| pr[q]).min().map(|m| m % 2 == 0).unwrap_or(false)
            }
        }
    }

    /// Priority view: Buchi marks become 0/1, co-Buchi marks 1/2, parity is
    /// itself.  Minimum-even semantics coincide with the original condition.
    pub fn priority_of(&self, q: usize) -> u32 {
        match self {
            Acceptance::Buchi(f) => u32::from(!f[q]),
            Acceptance::CoBuchi(f) => if f[q] { 1 } else { 2 },
            Acceptance::Parity(pr) => pr[q],
        }
    }
}

/// A deterministic omega-automaton with state-based acceptance.
///
/// The transition function may be partial; running off the defined part
/// rejects, exactly as if the automaton had been completed with a rejecting
/// sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetOmegaAutomaton {
    pub alphabet: Alphabet,
    names: Vec<String>,
    initial: usize,
    trans: Vec<Vec<Option<usize>>>,
    acceptance: Acceptance,
}

impl DetOmegaAutomaton {
    pub fn new(
        alphabet: Alphabet,
        names: Vec<String>,
        initial: usize,
        trans: Vec<Vec<Option<usize>>>,
        acceptance: Acceptance,
    ) -> Result<DetOmegaAutomaton> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidInput("automaton needs at least one state".into()));
        }
        if initial >= n || trans.len() != n || acceptance.len() != n {
            return Err(Error::InvalidInput("automaton component sizes disagree".into()));
        }
        for row in &trans {
            if row.len() != alphabet.len() {
                return Err(Error::InvalidInput("transition row does not match alphabet".into()));
            }
            if row.iter().flatten().any(|&t| t >= n) {
                return Err(Error::InvalidInput("transition target out of range".into()));
            }
        }
        Ok(DetOmegaAutomaton { alphabet, names, initial, trans, acceptance })
    }

    /// The one-state automaton accepting every word of the alphabet.
    pub fn accept_all(alphabet: Alphabet) -> DetOmegaAutomaton {
        let n = alphabet.len();
        DetOmegaAutomaton {
            alphabet,
            names: vec!["top".into()],
            initial: 0,
            trans: vec![vec![Some(0); n]],
            acceptance: Acceptance::Buchi(vec![true]),
        }
    }

    /// The one-state automaton rejecting every word of the alphabet.
    pub fn reject_all(alphabet: Alphabet) -> DetOmegaAutomaton {
        let n = alphabet.len();
        DetOmegaAutomaton {
            alphabet,
            names: vec!["bot".into()],
            initial: 0,
            trans: vec![vec![Some(0); n]],
            acceptance: Acceptance::Buchi(vec![false]),
        }
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn state_names(&self) -> &[String] {
        &self.names
    }

    pub fn acceptance(&self) -> &Acceptance {
        &self.acceptance
    }

    pub fn step(&self, q: usize, sym: usize) -> Option<usize> {
        self.trans[q][sym]
    }

    pub fn transitions(&self, q: usize) -> &[Option<usize>] {
        &self.trans[q]
    }

    pub fn is_complete(&self) -> bool {
        self.trans.iter().all(|row| row.iter().all(Option::is_some))
    }

    /// Runs the lasso and decides acceptance.
    ///
    /// The cycle-pass function from each entry state is memoized, so the
    /// walk needs at most |stem| + |states| * |cycle| transition steps.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        debug_assert!(!w.cycle.is_empty());
        let mut q = self.initial;
        for &sym in &w.stem {
            match self.trans[q][sym] {
                Some(t) => q = t,
                None => return false,
            }
        }
        // pass[start] = (end state, states touched during the pass).
        let mut pass: BTreeMap<usize, Option<(usize, BTreeSet<usize>)>> = BTreeMap::new();
        let mut order: Vec<usize> = vec![q];
        let mut position: BTreeMap<usize, usize> = BTreeMap::from([(q, 0)]);
        loop {
            let start = *order.last().unwrap();
            let entry = pass.entry(start).or_insert_with(|| {
                let mut cur = start;
                let mut touched = BTreeSet::from([start]);
                for &sym in &w.cycle {
                    match self.trans[cur][sym] {
                        Some(t) => {
                            cur = t;
                            touched.insert(t);
                        }
                        None => return None,
                    }
                }
                Some((cur, touched))
            });
            let (end, _) = match entry {
                Some(e) => e.clone(),
                None => return false,
            };
            if let Some(&i) = position.get(&end) {
                // Passes order[i..] repeat forever; their touched sets are
                // exactly the states visited infinitely often.
                let mut inf = BTreeSet::new();
                for &s in &order[i..] {
                    if let Some(Some((_, touched))) = pass.get(&s) {
                        inf.extend(touched.iter().copied());
                    }
                }
                return self.acceptance.satisfied_by(&inf);
            }
            position.insert(end, order.len());
            order.push(end);
        }
    }

    /// Totalizes the transition function by adding a rejecting sink, if
    /// needed.  The sink rejects under every acceptance kind: outside the
    /// Buchi set, inside the co-Buchi set, or at the largest odd priority.
    pub fn complete(&self) -> DetOmegaAutomaton {
        if self.is_complete() {
            return self.clone();
        }
        let n = self.state_count();
        let mut names = self.names.clone();
        let mut sink_name = "sink".to_string();
        while names.contains(&sink_name) {
            sink_name.push('\'');
        }
        names.push(sink_name);
        let mut trans: Vec<Vec<Option<usize>>> = self
            .trans
            .iter()
            .map(|row| row.iter().map(|t| t.or(Some(n))).collect())
            .collect();
        trans.push(vec![Some(n); self.alphabet.len()]);
        let acceptance = match &self.acceptance {
            Acceptance::Buchi(f) => {
                let mut f = f.clone();
                f.push(false);
                Acceptance::Buchi(f)
            }
            Acceptance::CoBuchi(f) => {
                let mut f = f.clone();
                f.push(true);
                Acceptance::CoBuchi(f)
            }
            Acceptance::Parity(pr) => {
                let max = pr.iter().copied().max().unwrap_or(1);
                let sink = if max % 2 == 1 { max } else { max + 1 };
                let mut pr = pr.clone();
                pr.push(sink);
                Acceptance::Parity(pr)
            }
        };
        DetOmegaAutomaton {
            alphabet: self.alphabet.clone(),
            names,
            initial: self.initial,
            trans,
            acceptance,
        }
    }

    /// The complement automaton: same structure, dual acceptance.  Requires
    /// a complete transition function, otherwise the run that falls off
    /// would be "accepted" by the dual for the wrong reason.
    pub fn dualize(&self) -> Result<DetOmegaAutomaton> {
        if !self.is_complete() {
            return Err(Error::InvalidInput(
                "dualize requires a complete automaton; call complete() first".into(),
            ));
        }
        let acceptance = match &self.acceptance {
            Acceptance::Buchi(f) => Acceptance::CoBuchi(f.clone()),
            Acceptance::CoBuchi(f) => Acceptance::Buchi(f.clone()),
            Acceptance::Parity(pr) => Acceptance::Parity(pr.iter().map(|p| p + 1).collect()),
        };
        Ok(DetOmegaAutomaton { acceptance, ..self.clone() })
    }

    /// Intersection of two deterministic Buchi automata over the same
    /// alphabet, via a round counter: phase 1 waits for the first automaton
    /// to accept, phase 2 for the second, and completing the round passes
    /// through a dedicated flip phase 0, which is the accepting event.
    /// (Marking phase-1 states that happen to sit on an accepting second
    /// component would be wrong: a run parked in phase 1 forever can touch
    /// such states without either automaton accepting.)
    pub fn intersect_dba(&self, other: &DetOmegaAutomaton) -> Result<DetOmegaAutomaton> {
        let (fa, fb) = match (&self.acceptance, &other.acceptance) {
            (Acceptance::Buchi(fa), Acceptance::Buchi(fb)) => (fa, fb),
            _ => return Err(Error::InvalidInput("intersect_dba needs two Buchi automata".into())),
        };
        if self.alphabet != other.alphabet {
            return Err(Error::InvalidInput("intersect_dba needs a common alphabet".into()));
        }
        if !self.is_complete() || !other.is_complete() {
            return Err(Error::InvalidInput("intersect_dba needs complete automata".into()));
        }
        let start = (self.initial, other.initial, 1u8);
        let mut index: BTreeMap<(usize, usize, u8), usize> = BTreeMap::from([(start, 0)]);
        let mut states = vec![start];
        let mut trans: Vec<Vec<Option<usize>>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let (a, b, phase) = states[i];
            let mut row = Vec::with_capacity(self.alphabet.len());
            for sym in 0..self.alphabet.len() {
                let a2 = self.trans[a][sym].unwrap();
                let b2 = other.trans[b][sym].unwrap();
                let phase2 = match phase {
                    // Phase 0 is the instant after a completed round and
                    // otherwise behaves like phase 1.
                    0 | 1 => if fa[a2] { 2 } else { 1 },
                    _ => if fb[b2] { 0 } else { 2 },
                };
                let key = (a2, b2, phase2);
                let j = *index.entry(key).or_insert_with(|| {
                    states.push(key);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                row.push(Some(j));
            }
            trans.push(row);
        }
        let accept: Vec<bool> = states.iter().map(|&(_, _, ph)| ph == 0).collect();
        let names = (0..states.len()).map(|i| format!("s{i}")).collect();
        Ok(DetOmegaAutomaton {
            alphabet: self.alphabet.clone(),
            names,
            initial: 0,
            trans,
            acceptance: Acceptance::Buchi(accept),
        })
    }

    /// A lasso accepted by the automaton, or `None` when the language is
    /// empty.  Witnesses are found by component analysis of the reachable
    /// transition graph and are verified against `accepts_lasso` in debug
    /// builds.
    pub fn emptiness_witness(&self) -> Option<LassoWord> {
        let witness = self.emptiness_witness_impl();
        if let Some(w) = &witness {
            debug_assert!(self.accepts_lasso(w), "emptiness witness must be accepted");
        }
        witness
    }

    pub fn is_empty(&self) -> bool {
        self.emptiness_witness().is_none()
    }

    fn emptiness_witness_impl(&self) -> Option<LassoWord> {
        let n = self.state_count();
        let reachable = self.reachable_mask();
        // Express every acceptance kind through priorities and look, for
        // each even priority p, for a reachable cycle that stays at priority
        // >= p and touches priority p.
        let prio: Vec<u32> = (0..n).map(|q| self.acceptance.priority_of(q)).collect();
        let mut evens: Vec<u32> = prio
            .iter()
            .copied()
            .filter(|p| p % 2 == 0)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        evens.sort_unstable();
        for p in evens {
            let allowed: Vec<bool> = (0..n).map(|q| reachable[q] && prio[q] >= p).collect();
            let comps = crate::model::chain_components(n, &allowed, |q| {
                self.trans[q]
                    .iter()
                    .flatten()
                    .copied()
                    .filter(|&t| allowed[t])
                    .collect()
            });
            for comp in comps {
                let has_cycle = comp.len() > 1
                    || self.trans[comp[0]]
                        .iter()
                        .flatten()
                        .any(|&t| t == comp[0]);
                if !has_cycle {
                    continue;
                }
                let Some(&pivot) = comp.iter().find(|&&q| prio[q] == p) else { continue };
                let stem = self.path_to(self.initial, pivot, |q| reachable[q])?;
                let cycle = self.cycle_through(pivot, &comp)?;
                return Some(LassoWord { stem, cycle });
            }
        }
        None
    }

    fn reachable_mask(&self) -> Vec<bool> {
        let mut seen = vec![false; self.state_count()];
        seen[self.initial] = true;
        let mut stack = vec![self.initial];
        while let Some(q) = stack.pop() {
            for t in self.trans[q].iter().flatten() {
                if !seen[*t] {
                    seen[*t] = true;
                    stack.push(*t);
                }
            }
        }
        seen
    }

    /// BFS path from `from` to `to` through states allowed by `ok`,
    /// returning the symbol sequence.
    fn path_to(&self, from: usize, to: usize, ok: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        if from == to {
            return Some(Vec::new());
        }
        let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        while let Some(q) = queue.pop_front() {
            for (sym, t) in self.trans[q].iter().enumerate() {
                let Some(t) = *t else { continue };
                if !ok(t) || t == from || prev.contains_key(&t) {
                    continue;
                }
                prev.insert(t, (q, sym));
                if t == to {
                    let mut path = Vec::new();
                    let mut cur = to;
                    while cur != from {
                        let (p, sym) = prev[&cur];
                        path.push(sym);
                        cur = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(t);
            }
        }
        None
    }

    /// A cycle from `pivot` back to itself staying inside `comp`.
    fn cycle_through(&self, pivot: usize, comp: &[usize]) -> Option<Vec<usize>> {
        let inside = |q: usize| comp.contains(&q);
        // First take one step out of pivot (staying inside), then BFS back.
        for (sym, t) in self.trans[pivot].iter().enumerate() {
            let Some(t) = *t else { continue };
            if !inside(t) {
                continue;
            }
            if t == pivot {
                return Some(vec![sym]);
            }
            if let Some(mut back) = self.path_to(t, pivot, inside) {
                let mut cycle = vec![sym];
                cycle.append(&mut back);
                return Some(cycle);
            }
        }
        None
    }

    /// View with transition marks (target-state acceptance becomes the mark
    /// of each incoming transition); the entry point for the
    /// nondeterministic constructions.
    pub fn to_nondet(&self) -> NondetOmegaAutomaton {
        let kind = match &self.acceptance {
            Acceptance::Buchi(_) => MarkKind::Buchi,
            Acceptance::CoBuchi(_) => MarkKind::CoBuchi,
            Acceptance::Parity(_) => MarkKind::Parity,
        };
        let trans = (0..self.state_count())
            .map(|q| {
                self.trans[q]
                    .iter()
                    .enumerate()
                    .filter_map(|(sym, t)| {
                        t.map(|t| {
                            let mark = match &self.acceptance {
                                Acceptance::Buchi(f) => f[t].then_some(0),
                                Acceptance::CoBuchi(f) => f[t].then_some(0),
                                Acceptance::Parity(pr) => Some(pr[t]),
                            };
                            NTrans { symbol: sym, target: t, mark }
                        })
                    })
                    .collect()
            })
            .collect();
        NondetOmegaAutomaton {
            alphabet: self.alphabet.clone(),
            names: self.names.clone(),
            initials: vec![self.initial],
            trans,
            kind,
        }
    }
}

/// What a transition mark means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkKind {
    /// Marked transitions must occur infinitely often.
    Buchi,
    /// Marked transitions must occur finitely often.
    CoBuchi,
    /// Marks are priorities; the minimum priority crossed infinitely often
    /// must be even.  Every transition carries a priority.
    Parity,
}

/// One nondeterministic transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NTrans {
    pub symbol: usize,
    pub target: usize,
    pub mark: Option<u32>,
}

/// A nondeterministic omega-automaton with transition-based acceptance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NondetOmegaAutomaton {
    pub alphabet: Alphabet,
    names: Vec<String>,
    initials: Vec<usize>,
    trans: Vec<Vec<NTrans>>,
    kind: MarkKind,
}

impl NondetOmegaAutomaton {
    pub fn new(
        alphabet: Alphabet,
        names: Vec<String>,
        initials: Vec<usize>,
        mut trans: Vec<Vec<NTrans>>,
        kind: MarkKind,
    ) -> Result<NondetOmegaAutomaton> {
        let n = names.len();
        if n == 0 || initials.is_empty() {
            return Err(Error::InvalidInput("nondeterministic automaton needs states and an initial state".into()));
        }
        if trans.len() != n || initials.iter().any(|&q| q >= n) {
            return Err(Error::InvalidInput("automaton component sizes disagree".into()));
        }
        for row in &mut trans {
            row.sort();
            row.dedup();
            for t in row.iter() {
                if t.target >= n || t.symbol >= alphabet.len() {
                    return Err(Error::InvalidInput("transition out of range".into()));
                }
                if kind == MarkKind::Parity && t.mark.is_none() {
                    return Err(Error::InvalidInput("parity marks must be total".into()));
                }
            }
        }
        Ok(NondetOmegaAutomaton { alphabet, names, initials, trans, kind })
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn initials(&self) -> &[usize] {
        &self.initials
    }

    pub fn transitions(&self, q: usize) -> &[NTrans] {
        &self.trans[q]
    }

    pub fn kind(&self) -> MarkKind {
        self.kind
    }

    /// Witness lasso for nonemptiness of a Buchi-marked automaton: a
    /// reachable strongly connected component containing a marked
    /// transition.
    pub fn emptiness_witness(&self) -> Result<Option<LassoWord>> {
        if self.kind != MarkKind::Buchi {
            return Err(Error::InvalidInput(
                "nondeterministic emptiness is implemented for Buchi marks".into(),
            ));
        }
        let n = self.state_count();
        let mut reachable = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        for &i in &self.initials {
            if !reachable[i] {
                reachable[i] = true;
                stack.push(i);
            }
        }
        while let Some(q) = stack.pop() {
            for t in &self.trans[q] {
                if !reachable[t.target] {
                    reachable[t.target] = true;
                    stack.push(t.target);
                }
            }
        }
        let comps = crate::model::chain_components(n, &reachable, |q| {
            self.trans[q]
                .iter()
                .map(|t| t.target)
                .filter(|&t| reachable[t])
                .collect()
        });
        let mut comp_of = vec![usize::MAX; n];
        for (c, members) in comps.iter().enumerate() {
            for &v in members {
                comp_of[v] = c;
            }
        }
        for comp in &comps {
            // A marked transition inside the component?
            let marked = comp.iter().find_map(|&q| {
                self.trans[q]
                    .iter()
                    .find(|t| t.mark.is_some() && comp_of[t.target] == comp_of[q])
                    .map(|t| (q, *t))
            });
            let Some((u, edge)) = marked else { continue };
            let stem = self.bfs_path_from_initials(u, &reachable)?;
            // Cycle: the marked edge, then back from its target to u inside
            // the component.
            let mut cycle = vec![edge.symbol];
            if edge.target != u {
                cycle.extend(self.bfs_path(edge.target, u, |q| comp_of[q] == comp_of[u])?);
            }
            return Ok(Some(LassoWord { stem, cycle }));
        }
        Ok(None)
    }

    fn bfs_path_from_initials(&self, to: usize, reachable: &[bool]) -> Result<Vec<usize>> {
        if self.initials.contains(&to) {
            return Ok(Vec::new());
        }
        let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut queue: VecDeque<usize> = self.initials.iter().copied().collect();
        while let Some(q) = queue.pop_front() {
            for t in &self.trans[q] {
                if !reachable[t.target] || prev.contains_key(&t.target) || self.initials.contains(&t.target) {
                    continue;
                }
                prev.insert(t.target, (q, t.symbol));
                if t.target == to {
                    let mut path = Vec::new();
                    let mut cur = to;
                    while !self.initials.contains(&cur) {
                        let (p, sym) = prev[&cur];
                        path.push(sym);
                        cur = p;
                    }
                    path.reverse();
                    return Ok(path);
                }
                queue.push_back(t.target);
            }
        }
        Err(Error::InvalidInput("internal: witness target unreachable".into()))
    }

    /// Decides whether some run over the lasso satisfies the acceptance
    /// condition, by component analysis of the synchronized product of the
    /// automaton with the lasso's positions.  This is a direct decision
    /// procedure, independent of any determinization.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        let s = w.stem.len();
        let total = s + w.cycle.len();
        let n = self.state_count();
        let node = |q: usize, j: usize| q * total + j;
        let next = |j: usize| if j + 1 == total { s } else { j + 1 };
        // Edge priorities: Buchi marks become 0/1, co-Buchi marks 1/2,
        // parity marks are themselves.  A run is accepting iff the minimum
        // priority crossed infinitely often is even.
        let edge_prio = |t: &NTrans| match self.kind {
            MarkKind::Buchi => u32::from(t.mark.is_none()),
            MarkKind::CoBuchi => if t.mark.is_some() { 1 } else { 2 },
            MarkKind::Parity => t.mark.expect("parity marks are total"),
        };
        let mut reach = vec![false; n * total];
        let mut stack: Vec<usize> = Vec::new();
        for &q in &self.initials {
            if !reach[node(q, 0)] {
                reach[node(q, 0)] = true;
                stack.push(node(q, 0));
            }
        }
        while let Some(v) = stack.pop() {
            let (q, j) = (v / total, v % total);
            for t in &self.trans[q] {
                if t.symbol == w.at(j) && !reach[node(t.target, next(j))] {
                    reach[node(t.target, next(j))] = true;
                    stack.push(node(t.target, next(j)));
                }
            }
        }
        let evens: BTreeSet<u32> = self
            .trans
            .iter()
            .flatten()
            .map(edge_prio)
            .filter(|p| p % 2 == 0)
            .collect();
        for e in evens {
            let succ = |v: usize| -> Vec<usize> {
                let (q, j) = (v / total, v % total);
                self.trans[q]
                    .iter()
                    .filter(|t| t.symbol == w.at(j) && edge_prio(t) >= e)
                    .map(|t| node(t.target, next(j)))
                    .filter(|&u| reach[u])
                    .collect()
            };
            let comps = crate::model::chain_components(n * total, &reach, succ);
            let mut comp_of = vec![usize::MAX; n * total];
            for (c, members) in comps.iter().enumerate() {
                for &v in members {
                    comp_of[v] = c;
                }
            }
            for comp in &comps {
                let internal_e_edge = comp.iter().any(|&v| {
                    let (q, j) = (v / total, v % total);
                    self.trans[q].iter().any(|t| {
                        t.symbol == w.at(j)
                            && edge_prio(t) == e
                            && reach[node(t.target, next(j))]
                            && comp_of[node(t.target, next(j))] == comp_of[v]
                    })
                });
                // A singleton component counts only with a self-loop, which
                // the internal-edge test checks implicitly.
                if internal_e_edge {
                    return true;
                }
            }
        }
        false
    }

    fn bfs_path(&self, from: usize, to: usize, ok: impl Fn(usize) -> bool) -> Result<Vec<usize>> {
        let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        while let Some(q) = queue.pop_front() {
            for t in &self.trans[q] {
                if !ok(t.target) || t.target == from || prev.contains_key(&t.target) {
                    continue;
                }
                prev.insert(t.target, (q, t.symbol));
                if t.target == to {
                    let mut path = Vec::new();
                    let mut cur = to;
                    while cur != from {
                        let (p, sym) = prev[&cur];
                        path.push(sym);
                        cur = p;
                    }
                    path.reverse();
                    return Ok(path);
                }
                queue.push_back(t.target);
            }
        }
        Err(Error::InvalidInput("internal: cycle closure not found".into()))
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn alternation_accepts_and_rejects() {
        let aut = alternation();
        assert!(aut.accepts_lasso(&w(&[], &[0, 1])));
        assert!(aut.accepts_lasso(&w(&[0], &[1, 0])));
        assert!(!aut.accepts_lasso(&w(&[], &[0, 0, 1])));
        assert!(!aut.accepts_lasso(&w(&[0, 0], &[0, 1])));
    }

    #[test]
    fn dualize_flips_every_lasso() {
        let aut = alternation();
        let dual = aut.dualize().unwrap();
        // (aab)^w has a repeated a: rejected by the property, accepted by
        // the dual.
        assert!(dual.accepts_lasso(&w(&[], &[0, 0, 1])));
        assert!(!dual.accepts_lasso(&w(&[], &[0, 1])));
    }

    #[test]
    fn dualize_requires_completeness() {
        let alphabet = ab();
        let partial = DetOmegaAutomaton::new(
            alphabet,
            vec!["s".into()],
            0,
            vec![vec![Some(0), None]],
            Acceptance::Buchi(vec![true]),
        )
        .unwrap();
        assert!(partial.dualize().is_err());
        assert!(partial.complete().dualize().is_ok());
    }

    #[test]
    fn completion_sink_priorities_take_the_largest_odd() {
        let alphabet = ab();
        let partial = DetOmegaAutomaton::new(
            alphabet.clone(),
            vec!["s".into()],
            0,
            vec![vec![Some(0), None]],
            Acceptance::Parity(vec![3]),
        )
        .unwrap();
        // Largest priority 3 is odd already: the sink reuses it.
        match partial.complete().acceptance() {
            Acceptance::Parity(pr) => assert_eq!(pr, &vec![3, 3]),
            _ => unreachable!(),
        }
        let partial = DetOmegaAutomaton::new(
            alphabet,
            vec!["s".into()],
            0,
            vec![vec![Some(0), None]],
            Acceptance::Parity(vec![2]),
        )
        .unwrap();
        match partial.complete().acceptance() {
            Acceptance::Parity(pr) => assert_eq!(pr, &vec![2, 3]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn falling_off_a_partial_automaton_rejects() {
        let alphabet = ab();
        let partial = DetOmegaAutomaton::new(
            alphabet,
            vec!["s".into()],
            0,
            vec![vec![Some(0), None]],
            Acceptance::Buchi(vec![true]),
        )
        .unwrap();
        assert!(partial.accepts_lasso(&w(&[], &[0])));
        assert!(!partial.accepts_lasso(&w(&[], &[0, 1])));
        assert!(!partial.accepts_lasso(&w(&[1], &[0])));
    }

    #[test]
    fn intersection_behaves_on_examples() {
        let alt = alternation();
        let inf_a = infinitely_many_a();
        let both = alt.intersect_dba(&inf_a).unwrap();
        assert!(both.accepts_lasso(&w(&[], &[0, 1])));
        assert!(!both.accepts_lasso(&w(&[], &[1])));
        assert!(!both.accepts_lasso(&w(&[], &[0, 0, 1])));
    }

    #[test]
    fn intersection_of_disjoint_languages_is_empty() {
        // Alternation forces the first symbol to be a; this automaton
        // forces it to be b.
        let disjoint = {
            let alphabet = ab();
            DetOmegaAutomaton::new(
                alphabet,
                vec!["want_b".into(), "rest".into(), "sink".into()],
                0,
                vec![
                    vec![Some(2), Some(1)],
                    vec![Some(1), Some(1)],
                    vec![Some(2), Some(2)],
                ],
                Acceptance::Buchi(vec![false, true, false]),
            )
            .unwrap()
        };
        let empty = alternation().intersect_dba(&disjoint).unwrap();
        assert!(empty.is_empty());
        assert!(empty.emptiness_witness().is_none());
    }

    #[test]
    fn emptiness_witness_is_returned_and_valid() {
        let aut = alternation();
        let witness = aut.emptiness_witness().unwrap();
        assert!(aut.accepts_lasso(&witness));
    }

    #[test]
    fn parity_emptiness_scans_even_priorities() {
        let alphabet = ab();
        // Priority 1 self loop on a; priority 2 self loop on b after one a.
        let aut = DetOmegaAutomaton::new(
            alphabet,
            vec!["u".into(), "v".into()],
            0,
            vec![vec![Some(0), Some(1)], vec![None, Some(1)]],
            Acceptance::Parity(vec![1, 2]),
        )
        .unwrap();
        let witness = aut.emptiness_witness().unwrap();
        assert!(aut.accepts_lasso(&witness));
        // The witness must loop on v (priority 2), not on u.
        assert_eq!(witness.cycle, vec![1]);
    }

    #[test]
    fn canonical_lasso_forms_identify_equal_words() {
        // a(ba)^w == ab(ab)^w == (ab)^w shifted: all equal to ab repeated.
        let w1 = w(&[0], &[1, 0]);
        let w2 = w(&[0, 1], &[0, 1]);
        let w3 = w(&[], &[0, 1, 0, 1]);
        assert!(w1.same_word(&w2));
        assert!(w2.same_word(&w3));
        assert_eq!(w3.canonical(), w(&[], &[0, 1]));
        assert!(!w1.same_word(&w(&[], &[1, 0])));
    }

    #[test]
    fn nondet_emptiness_finds_marked_cycle() {
        let alphabet = ab();
        // Guess a point to start looping on a with a mark.
        let aut = NondetOmegaAutomaton::new(
            alphabet,
            vec!["n0".into(), "n1".into()],
            vec![0],
            vec![
                vec![
                    NTrans { symbol: 0, target: 0, mark: None },
                    NTrans { symbol: 1, target: 1, mark: None },
                ],
                vec![NTrans { symbol: 0, target: 1, mark: Some(0) }],
            ],
            MarkKind::Buchi,
        )
        .unwrap();
        let witness = aut.emptiness_witness().unwrap().unwrap();
        // Witness must end in the marked a-loop on n1, reached via b.
        assert_eq!(witness.cycle, vec![0]);
        assert_eq!(witness.stem.last(), Some(&1));
    }

    #[test]
    fn run_alphabet_contains_states_and_steps() {
        let m = crate::model::fixtures::fig1_mdp();
        let alpha = Alphabet::run_alphabet(&m);
        assert_eq!(alpha.len(), 4 + 4 * 4);
        assert!(alpha.state_symbol("q0").is_some());
        assert!(alpha.step_symbol("beta1", "o1").is_some());
        assert!(alpha.step_symbol("missing", "o1").is_none());
    }
}
