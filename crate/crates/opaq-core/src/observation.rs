//! Observation functions over run symbols and the induced language
//! operations.
//!
//! A projection maps every run symbol — states and (action, label) steps —
//! to an observable or to silence (epsilon).  Observing a run erases silent
//! symbols; the observation of an infinite run is infinite exactly when the
//! run cannot eventually stay silent, which the divergence check
//! establishes once and for all for a model.  On top of the projection sit
//! the two language operations disclosure analysis needs: the image of an
//! automaton's language restricted to the runs of a model, and the inverse
//! image of a language of observations.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::{
    Alphabet, DetOmegaAutomaton, LassoWord, MarkKind, NTrans, NondetOmegaAutomaton,
};
use crate::model::{FiniteRun, LabeledMdp, LassoRun, RawProjection};
use crate::{Error, Result};

/// A total map from the run symbols of a model to observables or silence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    run_alphabet: Alphabet,
    observables: Alphabet,
    /// Indexed by run-alphabet symbol; `None` is silence.
    map: Vec<Option<usize>>,
}

impl Projection {
    /// Builds a projection from its serialized form.  Symbols missing from
    /// the maps, or mapped to the empty string, are silent.
    pub fn new(mdp: &LabeledMdp, raw: &RawProjection) -> Result<Projection> {
        let run_alphabet = Alphabet::run_alphabet(mdp);
        let observables = Alphabet::letters(raw.observables.iter().cloned())?;
        let mut used: BTreeSet<&str> = BTreeSet::new();
        let mut map = vec![None; run_alphabet.len()];
        let lookup = |name: &str| -> Result<Option<usize>> {
            if name.is_empty() {
                return Ok(None);
            }
            match observables.letter(name) {
                Some(i) => Ok(Some(i)),
                None => Err(Error::InvalidInput(format!(
                    "projection target '{name}' is not a declared observable"
                ))),
            }
        };
        for (state, target) in &raw.state_map {
            let Some(sym) = run_alphabet.state_symbol(state) else {
                return Err(Error::InvalidInput(format!(
                    "projection maps unknown state '{state}'"
                )));
            };
            map[sym] = lookup(target)?;
            if !target.is_empty() {
                used.insert(target);
            }
        }
        for (step, target) in &raw.step_map {
            let Some((action, label)) = step.split_once(',') else {
                return Err(Error::InvalidInput(format!(
                    "projection step key '{step}' needs the form <action>,<label>"
                )));
            };
            let Some(sym) = run_alphabet.step_symbol(action, label) else {
                return Err(Error::InvalidInput(format!(
                    "projection maps unknown step '{step}'"
                )));
            };
            map[sym] = lookup(target)?;
            if !target.is_empty() {
                used.insert(target);
            }
        }
        for obs in &raw.observables {
            if !used.contains(obs.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "observable '{obs}' is declared but never produced"
                )));
            }
        }
        Ok(Projection { run_alphabet, observables, map })
    }

    /// The identity projection: every run symbol is its own observable.
    pub fn identity(mdp: &LabeledMdp) -> Projection {
        let run_alphabet = Alphabet::run_alphabet(mdp);
        let observables =
            Alphabet::letters(run_alphabet.syms().iter().map(|s| s.to_string())).unwrap();
        let map = (0..run_alphabet.len()).map(Some).collect();
        Projection { run_alphabet, observables, map }
    }

    pub fn run_alphabet(&self) -> &Alphabet {
        &self.run_alphabet
    }

    pub fn observables(&self) -> &Alphabet {
        &self.observables
    }

    /// The observable for a run symbol, or `None` for silence.
    pub fn observe_symbol(&self, sym: usize) -> Option<usize> {
        self.map[sym]
    }

    pub fn observe_finite(&self, word: &[usize]) -> Vec<usize> {
        word.iter().filter_map(|&s| self.map[s]).collect()
    }

    /// The observation of an ultimately periodic run word: a lasso when the
    /// cycle stays audible, a finite word when the run goes silent forever.
    pub fn observe_word(&self, word: &LassoWord) -> ObsWord {
        let stem = self.observe_finite(&word.stem);
        let cycle = self.observe_finite(&word.cycle);
        if cycle.is_empty() {
            ObsWord::Finite(stem)
        } else {
            ObsWord::Lasso(LassoWord::new(stem, cycle).canonical())
        }
    }
}

/// The observation of a run: infinite observations are lassos over the
/// observables, and a run that is eventually silent observes to a finite
/// word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObsWord {
    Finite(Vec<usize>),
    Lasso(LassoWord),
}

impl ObsWord {
    pub fn same_observation(&self, other: &ObsWord) -> bool {
        match (self, other) {
            (ObsWord::Finite(a), ObsWord::Finite(b)) => a == b,
            (ObsWord::Lasso(a), ObsWord::Lasso(b)) => a.same_word(b),
            _ => false,
        }
    }

    pub fn render(&self, observables: &Alphabet) -> String {
        match self {
            ObsWord::Finite(w) => {
                let body = w
                    .iter()
                    .map(|&s| observables.sym(s).to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                format!("{body} (silence)")
            }
            ObsWord::Lasso(w) => w.render(observables),
        }
    }
}

/// The run word of a finite run: starting state, then alternating steps and
/// states.
pub fn run_word(alphabet: &Alphabet, mdp: &LabeledMdp, run: &FiniteRun) -> Result<Vec<usize>> {
    run.validate(mdp)?;
    let state_sym = |q: usize| {
        alphabet
            .state_symbol(mdp.state_name(q))
            .ok_or_else(|| Error::InvalidInput("alphabet lacks a state symbol".into()))
    };
    let mut word = vec![state_sym(run.start)?];
    for step in &run.steps {
        let sym = alphabet
            .step_symbol(mdp.action_name(step.action), mdp.label_name(step.label))
            .ok_or_else(|| Error::InvalidInput("alphabet lacks a step symbol".into()))?;
        word.push(sym);
        word.push(state_sym(step.target)?);
    }
    Ok(word)
}

/// The run word of a lasso run, as a lasso over the run alphabet.  The stem
/// covers everything up to the junction state; each cycle pass contributes
/// its steps and intermediate states.
pub fn lasso_word(alphabet: &Alphabet, mdp: &LabeledMdp, run: &LassoRun) -> Result<LassoWord> {
    run.validate(mdp)?;
    let stem_word = run_word(alphabet, mdp, &run.stem)?;
    // The stem already emitted the junction state; each cycle pass emits
    // its steps and the states they reach, ending back at the junction.
    let unrolled = FiniteRun { start: run.stem.end(), steps: run.cycle.clone() };
    let cycle_word = run_word(alphabet, mdp, &unrolled)?;
    Ok(LassoWord::new(stem_word, cycle_word[1..].to_vec()))
}

/// Verifies that no reachable cycle of the model is fully silent under the
/// projection.  With that established, every run observes to an infinite
/// word.
pub fn check_observation_divergence(mdp: &LabeledMdp, proj: &Projection) -> Result<()> {
    let alphabet = proj.run_alphabet();
    let mut reachable = vec![false; mdp.state_count()];
    for q in mdp.reachable_states() {
        reachable[q] = true;
    }
    let silent_state = |q: usize| -> bool {
        let sym = alphabet.state_symbol(mdp.state_name(q)).expect("state symbol exists");
        proj.observe_symbol(sym).is_none()
    };
    // Silent subgraph: silent states connected by silent steps.
    let n = mdp.state_count();
    let allowed: Vec<bool> = (0..n).map(|q| reachable[q] && silent_state(q)).collect();
    let successors = |q: usize| -> Vec<usize> {
        let mut out = Vec::new();
        for row in mdp.rows(q) {
            for &(label, target, _) in &row.dist {
                let sym = alphabet
                    .step_symbol(mdp.action_name(row.action), mdp.label_name(label))
                    .expect("step symbol exists");
                if proj.observe_symbol(sym).is_none() && allowed[target] {
                    out.push(target);
                }
            }
        }
        out
    };
    let comps = crate::model::chain_components(n, &allowed, successors);
    for comp in comps {
        let cyclic = comp.len() > 1 || successors(comp[0]).contains(&comp[0]);
        if cyclic {
            let cycle = comp
                .iter()
                .map(|&q| mdp.state_name(q).to_string())
                .collect::<Vec<_>>()
                .join(" -> ");
            return Err(Error::InvalidInput(format!(
                "the observation function is not divergent: the model can cycle silently \
                 through {{{cycle}}}, so some runs observe to a finite word; disclosure \
                 semantics needs every run to produce an infinite observation"
            )));
        }
    }
    Ok(())
}

/// Index space of the synchronized product underlying the image
/// construction: the model alternates between emitting a state symbol and a
/// step symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Phase {
    /// About to emit the state symbol of the current state.
    AtState,
    /// State symbol emitted; about to take a step.
    AfterState,
}

/// The image of `L(aut) ∩ Runs(model)` under the projection, as a
/// nondeterministic automaton over the observables with the same mark kind
/// as the input.
///
/// The construction synchronizes the automaton with the run graph of the
/// model — only words that are actual runs survive — and then eliminates
/// silent symbols, folding the marks of each silent segment into the next
/// audible transition (any-mark for Buchi and co-Buchi, minimum for
/// parity).  Divergence of the projection must be checked beforehand;
/// silent cycles would make the elimination unsound and are rejected here.
pub fn image_automaton(
    aut: &NondetOmegaAutomaton,
    proj: &Projection,
    mdp: &LabeledMdp,
) -> Result<NondetOmegaAutomaton> {
    if aut.alphabet != *proj.run_alphabet() {
        return Err(Error::InvalidInput(
            "image construction needs an automaton over the model's run alphabet".into(),
        ));
    }
    check_observation_divergence(mdp, proj)?;
    let alphabet = proj.run_alphabet();
    let state_sym: Vec<usize> = (0..mdp.state_count())
        .map(|q| alphabet.state_symbol(mdp.state_name(q)).expect("state symbol"))
        .collect();

    // Product nodes: (model state, phase, automaton state).
    type Node = (usize, Phase, usize);
    let mut index: BTreeMap<Node, usize> = BTreeMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut intern = |nodes: &mut Vec<Node>, key: Node| -> usize {
        *index.entry(key).or_insert_with(|| {
            nodes.push(key);
            nodes.len() - 1
        })
    };
    // Raw product edges: (observable or silence, mark, target node).
    let mut raw_edges: Vec<Vec<(Option<usize>, Option<u32>, usize)>> = Vec::new();
    let mut initials = Vec::new();
    for &a0 in aut.initials() {
        initials.push(intern(&mut nodes, (mdp.initial(), Phase::AtState, a0)));
    }
    let mut done = 0usize;
    while done < nodes.len() {
        let (q, phase, d) = nodes[done];
        let mut edges = Vec::new();
        match phase {
            Phase::AtState => {
                let sym = state_sym[q];
                let obs = proj.observe_symbol(sym);
                for t in aut.transitions(d) {
                    if t.symbol == sym {
                        let to = intern(&mut nodes, (q, Phase::AfterState, t.target));
                        edges.push((obs, t.mark, to));
                    }
                }
            }
            Phase::AfterState => {
                for row in mdp.rows(q) {
                    for &(label, target, _) in &row.dist {
                        let sym = alphabet
                            .step_symbol(mdp.action_name(row.action), mdp.label_name(label))
                            .expect("step symbol");
                        let obs = proj.observe_symbol(sym);
                        for t in aut.transitions(d) {
                            if t.symbol == sym {
                                let to = intern(&mut nodes, (target, Phase::AtState, t.target));
                                edges.push((obs, t.mark, to));
                            }
                        }
                    }
                }
            }
        }
        raw_edges.push(edges);
        done += 1;
    }

    // Silent elimination.  For each node, the set of (node, aggregate mark)
    // pairs reachable through silent edges; the silent subgraph is acyclic
    // thanks to divergence, so a depth-first enumeration terminates.
    let combine = |a: Option<u32>, b: Option<u32>| -> Option<u32> {
        match aut.kind() {
            MarkKind::Buchi | MarkKind::CoBuchi => a.or(b),
            MarkKind::Parity => match (a, b) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
        }
    };
    let n = nodes.len();
    let mut closures: Vec<Option<BTreeSet<(usize, Option<u32>)>>> = vec![None; n];
    fn closure_of(
        v: usize,
        raw_edges: &[Vec<(Option<usize>, Option<u32>, usize)>],
        combine: &impl Fn(Option<u32>, Option<u32>) -> Option<u32>,
        closures: &mut Vec<Option<BTreeSet<(usize, Option<u32>)>>>,
    ) -> BTreeSet<(usize, Option<u32>)> {
        if let Some(c) = &closures[v] {
            return c.clone();
        }
        let mut out: BTreeSet<(usize, Option<u32>)> = BTreeSet::from([(v, None)]);
        for &(obs, mark, to) in &raw_edges[v] {
            if obs.is_none() {
                for (w, agg) in closure_of(to, raw_edges, combine, closures) {
                    out.insert((w, combine(mark, agg)));
                }
            }
        }
        closures[v] = Some(out.clone());
        out
    }
    let mut trans: Vec<Vec<NTrans>> = vec![Vec::new(); n];
    for v in 0..n {
        let mut seen = BTreeSet::new();
        for (mid, agg) in closure_of(v, &raw_edges, &combine, &mut closures) {
            for &(obs, mark, to) in &raw_edges[mid] {
                if let Some(x) = obs {
                    let total_mark = combine(agg, mark);
                    if seen.insert((x, to, total_mark)) {
                        trans[v].push(NTrans { symbol: x, target: to, mark: total_mark });
                    }
                }
            }
        }
    }
    // Parity marks must be total; silent prefixes with no following audible
    // transition simply die, which is fine.
    if aut.kind() == MarkKind::Parity {
        for row in &mut trans {
            for t in row.iter_mut() {
                if t.mark.is_none() {
                    return Err(Error::InvalidInput(
                        "internal: parity image produced an unmarked transition".into(),
                    ));
                }
            }
        }
    }
    let names: Vec<String> = nodes
        .iter()
        .map(|&(q, phase, d)| {
            let tag = match phase {
                Phase::AtState => "at",
                Phase::AfterState => "in",
            };
            format!("{tag}_{}_{}", mdp.state_name(q), aut.state_name(d))
        })
        .collect();
    NondetOmegaAutomaton::new(proj.observables().clone(), names, initials, trans, aut.kind())
}

/// The inverse image of a deterministic automaton over the observables: a
/// deterministic automaton over the run alphabet accepting the words whose
/// observation the input accepts.  Silent symbols leave the state unchanged
/// (a word with a finite observation settles on the state its audible
/// prefix reaches, and is accepted by that state's own acceptance; under a
/// divergent projection no model run produces such a word).
pub fn inverse_image_automaton(
    aut: &DetOmegaAutomaton,
    proj: &Projection,
) -> Result<DetOmegaAutomaton> {
    if aut.alphabet != *proj.observables() {
        return Err(Error::InvalidInput(
            "inverse image needs an automaton over the projection's observables".into(),
        ));
    }
    let run_alphabet = proj.run_alphabet().clone();
    let trans: Vec<Vec<Option<usize>>> = (0..aut.state_count())
        .map(|d| {
            (0..run_alphabet.len())
                .map(|sym| match proj.observe_symbol(sym) {
                    Some(x) => aut.step(d, x),
                    None => Some(d),
                })
                .collect()
        })
        .collect();
    DetOmegaAutomaton::new(
        run_alphabet,
        aut.state_names().to_vec(),
        aut.initial(),
        trans,
        aut.acceptance().clone(),
    )
}

/// Enumerates lasso runs of a model with stem and cycle lengths (in steps)
/// up to the given bounds.  Every run starts at the initial state; cycles
/// are rooted at the stem's end state.  Intended for oracle-style sweeps
/// over small models.
pub fn enumerate_lasso_runs(mdp: &LabeledMdp, max_stem: usize, max_cycle: usize) -> Vec<LassoRun> {
    // All finite runs from q with exactly `len` steps.
    fn extend(mdp: &LabeledMdp, run: &FiniteRun, len: usize, out: &mut Vec<FiniteRun>) {
        if len == 0 {
            out.push(run.clone());
            return;
        }
        let q = run.end();
        for row in mdp.rows(q) {
            for &(label, target, _) in &row.dist {
                let mut next = run.clone();
                next.steps.push(crate::model::Step { action: row.action, label, target });
                extend(mdp, &next, len - 1, out);
            }
        }
    }
    let mut out = Vec::new();
    for stem_len in 0..=max_stem {
        let mut stems = Vec::new();
        extend(
            mdp,
            &FiniteRun { start: mdp.initial(), steps: Vec::new() },
            stem_len,
            &mut stems,
        );
        for stem in stems {
            for cycle_len in 1..=max_cycle {
                let mut cycles = Vec::new();
                extend(
                    mdp,
                    &FiniteRun { start: stem.end(), steps: Vec::new() },
                    cycle_len,
                    &mut cycles,
                );
                for cycle in cycles {
                    if cycle.end() == stem.end() {
                        out.push(LassoRun { stem: stem.clone(), cycle: cycle.steps });
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{Acceptance, DetOmegaAutomaton};
    use crate::model::fixtures::{choice, fig1_mdp, half};

    /// Projection for the coin-flip model: states are silent, steps observe
    /// their label.
    fn half_label_projection() -> (LabeledMdp, Projection) {
        let mdp = half();
        let raw = RawProjection {
            observables: vec!["a".into(), "b".into(), "o1".into(), "o2".into()],
            state_map: BTreeMap::new(),
            step_map: BTreeMap::from([
                ("go,a".into(), "a".into()),
                ("go,b".into(), "b".into()),
                ("stay,o1".into(), "o1".into()),
                ("stay,o2".into(), "o2".into()),
            ]),
        };
        let proj = Projection::new(&mdp, &raw).unwrap();
        (mdp, proj)
    }

    #[test]
    fn identity_projection_observes_everything() {
        let mdp = fig1_mdp();
        let proj = Projection::identity(&mdp);
        assert_eq!(proj.observables().len(), proj.run_alphabet().len());
        for sym in 0..proj.run_alphabet().len() {
            assert!(proj.observe_symbol(sym).is_some());
        }
        assert!(check_observation_divergence(&mdp, &proj).is_ok());
    }

    #[test]
    fn observation_erases_silence() {
        let (mdp, proj) = half_label_projection();
        let runs = enumerate_lasso_runs(&mdp, 1, 1);
        // Find the run s0 -go,a-> s1 with the stay-loop.
        let alphabet = proj.run_alphabet().clone();
        let run = runs
            .iter()
            .find(|r| r.stem.steps.len() == 1 && mdp.state_name(r.stem.end()) == "s1")
            .unwrap();
        let word = lasso_word(&alphabet, &mdp, run).unwrap();
        match proj.observe_word(&word) {
            ObsWord::Lasso(obs) => {
                assert_eq!(
                    obs.render(proj.observables()),
                    "a ( o1 )^w"
                );
            }
            ObsWord::Finite(_) => panic!("divergent projection yields infinite observations"),
        }
    }

    #[test]
    fn silent_cycles_are_rejected() {
        let mdp = half();
        let raw = RawProjection {
            observables: vec!["a".into(), "b".into()],
            state_map: BTreeMap::new(),
            step_map: BTreeMap::from([("go,a".into(), "a".into()), ("go,b".into(), "b".into())]),
        };
        let proj = Projection::new(&mdp, &raw).unwrap();
        let err = check_observation_divergence(&mdp, &proj).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cycle silently"), "{msg}");
        assert!(msg.contains("s1") || msg.contains("s2"), "{msg}");
    }

    #[test]
    fn unknown_projection_entries_are_rejected() {
        let mdp = half();
        let raw = RawProjection {
            observables: vec!["a".into()],
            state_map: BTreeMap::from([("nope".into(), "a".into())]),
            step_map: BTreeMap::new(),
        };
        assert!(Projection::new(&mdp, &raw).is_err());
        let raw = RawProjection {
            observables: vec!["a".into(), "unused".into()],
            state_map: BTreeMap::new(),
            step_map: BTreeMap::from([("go,a".into(), "a".into())]),
        };
        let err = Projection::new(&mdp, &raw).unwrap_err();
        assert!(err.to_string().contains("unused"), "{err}");
    }

    #[test]
    fn image_of_all_runs_is_the_observation_language() {
        let (mdp, proj) = half_label_projection();
        let everything = DetOmegaAutomaton::accept_all(proj.run_alphabet().clone());
        let image = image_automaton(&everything.to_nondet(), &proj, &mdp).unwrap();
        let obs = proj.observables();
        let a = obs.letter("a").unwrap();
        let b = obs.letter("b").unwrap();
        let o1 = obs.letter("o1").unwrap();
        let o2 = obs.letter("o2").unwrap();
        // Observations of runs: a o1^w or b o2^w.
        assert!(image.accepts_lasso(&LassoWord::new(vec![a], vec![o1])));
        assert!(image.accepts_lasso(&LassoWord::new(vec![b], vec![o2])));
        assert!(!image.accepts_lasso(&LassoWord::new(vec![a], vec![o2])));
        assert!(!image.accepts_lasso(&LassoWord::new(vec![], vec![o1])));
        assert!(!image.accepts_lasso(&LassoWord::new(vec![a, b], vec![o1])));
    }

    #[test]
    fn image_respects_the_automaton_conjunct() {
        let (mdp, proj) = half_label_projection();
        // Accept only runs that pass through s1: a DBA over the run
        // alphabet looping once s1's state symbol was seen.
        let alphabet = proj.run_alphabet().clone();
        let s1 = alphabet.state_symbol("s1").unwrap();
        let n = alphabet.len();
        let reach_s1 = DetOmegaAutomaton::new(
            alphabet.clone(),
            vec!["waiting".into(), "done".into()],
            0,
            vec![
                (0..n).map(|sym| Some(if sym == s1 { 1 } else { 0 })).collect(),
                vec![Some(1); n],
            ],
            Acceptance::Buchi(vec![false, true]),
        )
        .unwrap();
        let image = image_automaton(&reach_s1.to_nondet(), &proj, &mdp).unwrap();
        let obs = proj.observables();
        let a = obs.letter("a").unwrap();
        let b = obs.letter("b").unwrap();
        let o1 = obs.letter("o1").unwrap();
        let o2 = obs.letter("o2").unwrap();
        assert!(image.accepts_lasso(&LassoWord::new(vec![a], vec![o1])));
        assert!(!image.accepts_lasso(&LassoWord::new(vec![b], vec![o2])));
    }

    #[test]
    fn image_folds_marks_across_silence() {
        // Two states ping-ponging: the step into u is silent, the step back
        // observes x, and both states are silent.  Every run visits u
        // infinitely often, but only through silent symbols — marks sitting
        // on those symbols must survive into the audible transition.
        let mdp = LabeledMdp::new(
            vec!["s".into(), "u".into()],
            vec!["go".into(), "loud".into()],
            vec!["tick".into()],
            "s",
            vec![
                (
                    "s".into(),
                    "tick".into(),
                    vec![("go".into(), "u".into(), crate::parse_ratio("1").unwrap())],
                ),
                (
                    "u".into(),
                    "tick".into(),
                    vec![("loud".into(), "s".into(), crate::parse_ratio("1").unwrap())],
                ),
            ],
        )
        .unwrap();
        let raw = RawProjection {
            observables: vec!["x".into()],
            state_map: BTreeMap::new(),
            step_map: BTreeMap::from([("tick,loud".into(), "x".into())]),
        };
        let proj = Projection::new(&mdp, &raw).unwrap();
        check_observation_divergence(&mdp, &proj).unwrap();
        // Tracker automaton: state 1 iff the previous symbol was u.
        let alphabet = proj.run_alphabet().clone();
        let u_sym = alphabet.state_symbol("u").unwrap();
        let n = alphabet.len();
        let row = |_from: usize| -> Vec<Option<usize>> {
            (0..n).map(|sym| Some(if sym == u_sym { 1 } else { 0 })).collect()
        };
        let x = proj.observables().letter("x").unwrap();
        let xw = LassoWord::new(vec![], vec![x]);
        // Co-Buchi on "just visited u": no run avoids u, so the image over
        // the observables is empty.
        let avoid_u = DetOmegaAutomaton::new(
            alphabet.clone(),
            vec!["neutral".into(), "at_u".into()],
            0,
            vec![row(0), row(1)],
            Acceptance::CoBuchi(vec![false, true]),
        )
        .unwrap();
        let image = image_automaton(&avoid_u.to_nondet(), &proj, &mdp).unwrap();
        assert!(!image.accepts_lasso(&xw));
        // Buchi on the same structure: every run qualifies.
        let hit_u = DetOmegaAutomaton::new(
            alphabet,
            vec!["neutral".into(), "at_u".into()],
            0,
            vec![row(0), row(1)],
            Acceptance::Buchi(vec![false, true]),
        )
        .unwrap();
        let image = image_automaton(&hit_u.to_nondet(), &proj, &mdp).unwrap();
        assert!(image.accepts_lasso(&xw));
    }

    #[test]
    fn inverse_image_tracks_observations_and_ignores_silence() {
        let (mdp, proj) = half_label_projection();
        let obs = proj.observables().clone();
        let o1 = obs.letter("o1").unwrap();
        let n = obs.len();
        // "infinitely many o1" over the observables.
        let inf_o1 = DetOmegaAutomaton::new(
            obs,
            vec!["hit".into(), "miss".into()],
            1,
            vec![
                (0..n).map(|x| Some(if x == o1 { 0 } else { 1 })).collect(),
                (0..n).map(|x| Some(if x == o1 { 0 } else { 1 })).collect(),
            ],
            Acceptance::Buchi(vec![true, false]),
        )
        .unwrap();
        let lifted = inverse_image_automaton(&inf_o1, &proj).unwrap();
        assert_eq!(lifted.alphabet, *proj.run_alphabet());
        let alphabet = proj.run_alphabet().clone();
        // The run s0 go,a s1 (stay,o1 s1)^w observes a o1^w: accepted.
        let runs = enumerate_lasso_runs(&mdp, 1, 1);
        for run in &runs {
            let word = lasso_word(&alphabet, &mdp, run).unwrap();
            let expected = match proj.observe_word(&word) {
                ObsWord::Lasso(o) => o.cycle.contains(&o1),
                ObsWord::Finite(_) => unreachable!("projection is divergent"),
            };
            assert_eq!(lifted.accepts_lasso(&word), expected, "run {run:?}");
        }
    }

    #[test]
    fn image_soundness_on_enumerated_runs() {
        // For every small lasso run accepted by a property automaton, the
        // observation of that run is in the image language.
        let (mdp, proj) = half_label_projection();
        let alphabet = proj.run_alphabet().clone();
        let everything = DetOmegaAutomaton::accept_all(alphabet.clone());
        let image = image_automaton(&everything.to_nondet(), &proj, &mdp).unwrap();
        for run in enumerate_lasso_runs(&mdp, 2, 2) {
            let word = lasso_word(&alphabet, &mdp, &run).unwrap();
            match proj.observe_word(&word) {
                ObsWord::Lasso(obs) => {
                    assert!(image.accepts_lasso(&obs), "missing observation of {run:?}");
                }
                ObsWord::Finite(_) => unreachable!("projection is divergent"),
            }
        }
    }

    #[test]
    fn choice_fixture_has_lasso_runs_through_both_actions() {
        let mdp = choice();
        let runs = enumerate_lasso_runs(&mdp, 1, 1);
        let actions: BTreeSet<&str> = runs
            .iter()
            .filter_map(|r| r.stem.steps.first())
            .map(|s| mdp.action_name(s.action))
            .collect();
        assert!(actions.contains("go") && actions.contains("pick"));
    }
}
