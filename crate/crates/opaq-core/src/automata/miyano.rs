//! Breakpoint determinization of co-Buchi automata.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{Acceptance, DetOmegaAutomaton, MarkKind, NondetOmegaAutomaton};
use crate::{Error, Result};

/// Determinizes a nondeterministic co-Buchi automaton (marked transitions
/// may only occur finitely often on an accepting run) into a deterministic
/// co-Buchi automaton via the breakpoint construction.
///
/// States are pairs (S, O): S is the set of automaton states reachable on
/// the input so far, O the subset reachable by runs that have crossed no
/// marked transition since the last breakpoint.  O running empty is the
/// breakpoint; from a breakpoint the obligation restarts from all of S.  The
/// input has a run that eventually avoids marked transitions iff
/// breakpoints happen finitely often, so the breakpoint states are exactly
/// the co-Buchi set of the result.
pub fn miyano_hayashi(aut: &NondetOmegaAutomaton) -> Result<DetOmegaAutomaton> {
    if aut.kind() != MarkKind::CoBuchi {
        return Err(Error::InvalidInput(
            "breakpoint determinization expects co-Buchi transition marks".into(),
        ));
    }
    type Key = (BTreeSet<usize>, BTreeSet<usize>);
    let post = |set: &BTreeSet<usize>, sym: usize, good_only: bool| -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &q in set {
            for t in aut.transitions(q) {
                if t.symbol == sym && (!good_only || t.mark.is_none()) {
                    out.insert(t.target);
                }
            }
        }
        out
    };
    let start: Key = (aut.initials().iter().copied().collect(), BTreeSet::new());
    let mut index: BTreeMap<Key, usize> = BTreeMap::from([(start.clone(), 0)]);
    let mut states: Vec<Key> = vec![start];
    let mut trans: Vec<Vec<Option<usize>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (s, o) = states[i].clone();
        let mut row = Vec::with_capacity(aut.alphabet.len());
        for sym in 0..aut.alphabet.len() {
            let s2 = post(&s, sym, false);
            let o2 = if o.is_empty() { post(&s, sym, true) } else { post(&o, sym, true) };
            debug_assert!(o2.is_subset(&s2));
            let key = (s2, o2);
            let j = *index.entry(key.clone()).or_insert_with(|| {
                states.push(key);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            row.push(Some(j));
        }
        trans.push(row);
    }
    let breakpoint: Vec<bool> = states.iter().map(|(_, o)| o.is_empty()).collect();
    let names: Vec<String> = states
        .iter()
        .map(|(s, o)| {
            let part = |set: &BTreeSet<usize>| {
                set.iter().map(|&q| aut.state_name(q)).collect::<Vec<_>>().join(",")
            };
            format!("{{{}|{}}}", part(s), part(o))
        })
        .collect();
    DetOmegaAutomaton::new(
        aut.alphabet.clone(),
        names,
        0,
        trans,
        Acceptance::CoBuchi(breakpoint),
    )
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::NTrans;
    use super::*;

    /// Co-Buchi NBA for "finitely many b": a single state where b-loops are
    /// marked.
    fn finitely_many_b() -> NondetOmegaAutomaton {
        NondetOmegaAutomaton::new(
            ab(),
            vec!["n".into()],
            vec![0],
            vec![vec![
                NTrans { symbol: 0, target: 0, mark: None },
                NTrans { symbol: 1, target: 0, mark: Some(0) },
            ]],
            MarkKind::CoBuchi,
        )
        .unwrap()
    }

    /// A nondeterministic co-Buchi automaton for "eventually only a or
    /// eventually only b": guess which letter survives.  Waiting in the
    /// guess state is marked, so a run must eventually commit.
    fn eventually_constant() -> NondetOmegaAutomaton {
        NondetOmegaAutomaton::new(
            ab(),
            vec!["g".into(), "only_a".into(), "only_b".into()],
            vec![0],
            vec![
                vec![
                    NTrans { symbol: 0, target: 0, mark: Some(0) },
                    NTrans { symbol: 1, target: 0, mark: Some(0) },
                    NTrans { symbol: 0, target: 1, mark: None },
                    NTrans { symbol: 1, target: 2, mark: None },
                ],
                vec![
                    NTrans { symbol: 0, target: 1, mark: None },
                    NTrans { symbol: 1, target: 1, mark: Some(0) },
                ],
                vec![
                    NTrans { symbol: 1, target: 2, mark: None },
                    NTrans { symbol: 0, target: 2, mark: Some(0) },
                ],
            ],
            MarkKind::CoBuchi,
        )
        .unwrap()
    }

    #[test]
    fn breakpoint_matches_finitely_many_b() {
        let det = miyano_hayashi(&finitely_many_b()).unwrap();
        assert!(det.accepts_lasso(&w(&[], &[0])));
        assert!(det.accepts_lasso(&w(&[1, 1, 1], &[0])));
        assert!(!det.accepts_lasso(&w(&[], &[1])));
        assert!(!det.accepts_lasso(&w(&[0], &[0, 1])));
    }

    #[test]
    fn breakpoint_handles_guessing() {
        let det = miyano_hayashi(&eventually_constant()).unwrap();
        assert!(det.accepts_lasso(&w(&[], &[0])));
        assert!(det.accepts_lasso(&w(&[0, 1, 0], &[1])));
        assert!(!det.accepts_lasso(&w(&[], &[0, 1])));
        assert!(!det.accepts_lasso(&w(&[0, 0], &[1, 1, 0])));
    }

    #[test]
    fn breakpoint_result_is_complete_and_deterministic() {
        let det = miyano_hayashi(&eventually_constant()).unwrap();
        assert!(det.is_complete());
    }

    #[test]
    fn breakpoint_agrees_with_direct_acceptance_on_random_automata() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed() ^ 2);
        let words = enumerate_lassos(2, 2, 3);
        for _ in 0..60 {
            let nca = random_nondet(&mut rng, 4, 2, MarkKind::CoBuchi);
            let det = miyano_hayashi(&nca).unwrap();
            for word in &words {
                assert_eq!(
                    nca.accepts_lasso(word),
                    det.accepts_lasso(word),
                    "disagree on {word:?} for {nca:?}"
                );
            }
        }
    }
}
