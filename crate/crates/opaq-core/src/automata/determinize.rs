//! Determinization of Buchi automata into parity automata, and the reverse
//! direction from parity back to nondeterministic Buchi.
//!
//! The determinization keeps the classical history trees in a compact form:
//! node names 1..m are always contiguous and ordered by age (smaller name =
//! older node), new nodes are born with the largest name, and a death shifts
//! every larger name down by one.  With that discipline the two step events
//! — the smallest name removed because its label emptied, and the smallest
//! name whose children covered it — translate directly into a min-even
//! parity condition.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{Acceptance, DetOmegaAutomaton, MarkKind, NTrans, NondetOmegaAutomaton};
use crate::{Error, Result};

/// Hard ceiling on the number of constructed parity states; beyond this the
/// construction reports a resource error instead of thrashing.
const MAX_PARITY_STATES: usize = 200_000;

/// One node of a history tree.  The vector index, plus one, is the node's
/// name; parents always precede children, so index order is age order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct TreeNode {
    label: BTreeSet<usize>,
    parent: Option<usize>,
}

type Tree = Vec<TreeNode>;

/// Result of one tree transition: the successor tree (`None` when every run
/// died) and the priority of the step.
struct StepOutcome {
    tree: Option<Tree>,
    priority: u32,
}

fn tree_step(tree: &Tree, sym: usize, nba: &NondetOmegaAutomaton, neutral: u32) -> StepOutcome {
    let old = tree.len();
    // Move every label forward; remember which arrivals crossed a marked
    // transition, because those spawn children.
    let mut nodes: Vec<TreeNode> = Vec::with_capacity(2 * old);
    let mut spawns: Vec<BTreeSet<usize>> = Vec::with_capacity(old);
    for node in tree {
        let mut all = BTreeSet::new();
        let mut marked = BTreeSet::new();
        for &q in &node.label {
            for t in nba.transitions(q) {
                if t.symbol == sym {
                    all.insert(t.target);
                    if t.mark.is_some() {
                        marked.insert(t.target);
                    }
                }
            }
        }
        nodes.push(TreeNode { label: all, parent: node.parent });
        spawns.push(marked);
    }
    for (p, spawn) in spawns.into_iter().enumerate() {
        if !spawn.is_empty() {
            nodes.push(TreeNode { label: spawn, parent: Some(p) });
        }
    }
    let total = nodes.len();
    let subtree = |nodes: &[TreeNode], root: usize| -> Vec<usize> {
        // Descendants always have larger indices.
        let mut in_sub = vec![false; nodes.len()];
        in_sub[root] = true;
        let mut out = vec![root];
        for j in root + 1..nodes.len() {
            if nodes[j].parent.is_some_and(|p| in_sub[p]) {
                in_sub[j] = true;
                out.push(j);
            }
        }
        out
    };
    // Horizontal pruning: among siblings, the older one keeps a shared
    // state; the younger loses it from its whole subtree.
    for parent in 0..total {
        let mut seen = BTreeSet::new();
        for child in parent + 1..total {
            if nodes[child].parent != Some(parent) {
                continue;
            }
            if !seen.is_empty() {
                for j in subtree(&nodes, child) {
                    nodes[j].label = &nodes[j].label - &seen;
                }
            }
            seen.extend(nodes[child].label.iter().copied());
        }
    }
    // Empty-label removal; the smallest removed name drives the odd event.
    let mut alive = vec![true; total];
    let mut min_removed: Option<usize> = None;
    for i in 0..total {
        let parent_dead = nodes[i].parent.is_some_and(|p| !alive[p]);
        if parent_dead || nodes[i].label.is_empty() {
            alive[i] = false;
            if min_removed.is_none() {
                min_removed = Some(i);
            }
        }
    }
    if !alive[0] {
        return StepOutcome { tree: None, priority: 1 };
    }
    // Cover detection: a node whose surviving children exactly cover its
    // label sheds those children and fires the even event.  Children shed
    // this way are not removals in the event sense.
    let mut min_green: Option<usize> = None;
    for i in 0..total {
        if !alive[i] {
            continue;
        }
        let children: Vec<usize> =
            (i + 1..total).filter(|&j| alive[j] && nodes[j].parent == Some(i)).collect();
        if children.is_empty() {
            continue;
        }
        let mut union = BTreeSet::new();
        for &c in &children {
            union.extend(nodes[c].label.iter().copied());
        }
        if union == nodes[i].label {
            if min_green.is_none() {
                min_green = Some(i);
            }
            for j in subtree(&nodes, i) {
                if j != i {
                    alive[j] = false;
                }
            }
        }
    }
    let priority = match (min_removed, min_green) {
        (None, None) => neutral,
        (Some(f), None) => 2 * (f as u32 + 1) - 1,
        (None, Some(e)) => 2 * (e as u32 + 1),
        (Some(f), Some(e)) => (2 * (f as u32 + 1) - 1).min(2 * (e as u32 + 1)),
    };
    // Compact: surviving nodes keep their order, names close ranks.
    let mut remap = vec![usize::MAX; total];
    let mut compact: Tree = Vec::new();
    for i in 0..total {
        if alive[i] {
            remap[i] = compact.len();
            compact.push(TreeNode {
                label: nodes[i].label.clone(),
                parent: nodes[i].parent.map(|p| remap[p]),
            });
        }
    }
    StepOutcome { tree: Some(compact), priority }
}

/// Determinizes a Buchi-marked nondeterministic automaton into a complete
/// deterministic parity automaton (min-even) over the same alphabet.
pub fn determinize_nba(nba: &NondetOmegaAutomaton) -> Result<DetOmegaAutomaton> {
    if nba.kind() != MarkKind::Buchi {
        return Err(Error::InvalidInput("determinization expects Buchi transition marks".into()));
    }
    let n = nba.state_count() as u32;
    // Working names never exceed twice the state count, so this neutral
    // priority is strictly below every real event.
    let neutral = 4 * n + 1;
    let initial_tree: Tree = vec![TreeNode {
        label: nba.initials().iter().copied().collect(),
        parent: None,
    }];

    let mut tree_ids: BTreeMap<Tree, usize> = BTreeMap::from([(initial_tree.clone(), 0)]);
    let mut trees: Vec<Tree> = vec![initial_tree];
    // Transition memo per tree (independent of the incoming priority):
    // target tree id (or None for the dead state) and step priority.
    let mut tree_moves: Vec<Option<Vec<(Option<usize>, u32)>>> = vec![None];

    // Parity states are (tree id, incoming priority), plus one absorbing
    // dead state.
    type PState = (Option<usize>, u32);
    let start: PState = (Some(0), neutral);
    let mut index: BTreeMap<PState, usize> = BTreeMap::from([(start, 0)]);
    let mut states: Vec<PState> = vec![start];
    let mut trans: Vec<Vec<Option<usize>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (tree_id, _) = states[i];
        let moves: Vec<(Option<usize>, u32)> = match tree_id {
            None => vec![(None, 1); nba.alphabet.len()],
            Some(tid) => {
                if tree_moves[tid].is_none() {
                    let mut row = Vec::with_capacity(nba.alphabet.len());
                    for sym in 0..nba.alphabet.len() {
                        let out = tree_step(&trees[tid], sym, nba, neutral);
                        let target = out.tree.map(|t| {
                            *tree_ids.entry(t.clone()).or_insert_with(|| {
                                trees.push(t);
                                tree_moves.push(None);
                                trees.len() - 1
                            })
                        });
                        row.push((target, out.priority));
                    }
                    tree_moves[tid] = Some(row);
                }
                tree_moves[tid].clone().unwrap()
            }
        };
        let mut row = Vec::with_capacity(nba.alphabet.len());
        for (target, prio) in moves {
            let key: PState = (target, prio);
            let j = *index.entry(key).or_insert_with(|| {
                states.push(key);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            row.push(Some(j));
        }
        trans.push(row);
        if states.len() > MAX_PARITY_STATES {
            return Err(Error::Resource(format!(
                "determinization exceeded {MAX_PARITY_STATES} states"
            )));
        }
    }
    let priorities: Vec<u32> = states.iter().map(|&(_, p)| p).collect();
    let names: Vec<String> = states
        .iter()
        .enumerate()
        .map(|(i, (t, _))| match t {
            Some(_) => format!("t{i}"),
            None => format!("t{i}_dead"),
        })
        .collect();
    let dpa = DetOmegaAutomaton::new(
        nba.alphabet.clone(),
        names,
        0,
        trans,
        Acceptance::Parity(priorities),
    )?;
    Ok(compress_priorities(&dpa))
}

/// Renumbers parity priorities onto the smallest range that preserves both
/// the order and the parity of the distinct values in use.  Minimum-even
/// acceptance is invariant under such a renaming, and later constructions
/// pay per distinct even priority.
pub fn compress_priorities(dpa: &DetOmegaAutomaton) -> DetOmegaAutomaton {
    let Acceptance::Parity(prio) = dpa.acceptance() else {
        return dpa.clone();
    };
    let distinct: BTreeSet<u32> = prio.iter().copied().collect();
    let mut map: BTreeMap<u32, u32> = BTreeMap::new();
    let mut next: Option<u32> = None;
    for v in distinct {
        let assigned = match next {
            None => v % 2,
            Some(prev) => {
                if prev % 2 == v % 2 {
                    prev
                } else {
                    prev + 1
                }
            }
        };
        map.insert(v, assigned);
        next = Some(assigned);
    }
    let new_prio: Vec<u32> = prio.iter().map(|p| map[p]).collect();
    DetOmegaAutomaton::new(
        dpa.alphabet.clone(),
        dpa.state_names().to_vec(),
        dpa.initial(),
        (0..dpa.state_count()).map(|q| dpa.transitions(q).to_vec()).collect(),
        Acceptance::Parity(new_prio),
    )
    .expect("renaming priorities preserves shape")
}

/// Converts a deterministic parity automaton into a language-equivalent
/// nondeterministic Buchi automaton by guessing, at some point of the run,
/// the even priority that will be the minimum seen from then on.  The
/// committed copy for priority e only permits states of priority >= e and
/// marks every entry into a state of priority exactly e.
pub fn nba_of_parity(dpa: &DetOmegaAutomaton) -> Result<NondetOmegaAutomaton> {
    let Acceptance::Parity(prio) = dpa.acceptance() else {
        return Err(Error::InvalidInput("nba_of_parity expects a parity automaton".into()));
    };
    let n = dpa.state_count();
    let evens: Vec<u32> = prio
        .iter()
        .copied()
        .filter(|p| p % 2 == 0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let committed = |ei: usize, q: usize| n + ei * n + q;
    let mut trans: Vec<Vec<NTrans>> = vec![Vec::new(); n * (1 + evens.len())];
    for q in 0..n {
        for (sym, target) in dpa.transitions(q).iter().enumerate() {
            let Some(t) = *target else { continue };
            trans[q].push(NTrans { symbol: sym, target: t, mark: None });
            for (ei, &e) in evens.iter().enumerate() {
                if prio[t] >= e {
                    let mark = (prio[t] == e).then_some(0);
                    trans[q].push(NTrans { symbol: sym, target: committed(ei, t), mark });
                    if prio[q] >= e {
                        trans[committed(ei, q)].push(NTrans {
                            symbol: sym,
                            target: committed(ei, t),
                            mark,
                        });
                    }
                }
            }
        }
    }
    let mut names: Vec<String> = (0..n).map(|q| dpa.state_name(q).to_string()).collect();
    for &e in &evens {
        for q in 0..n {
            names.push(format!("{}@{e}", dpa.state_name(q)));
        }
    }
    NondetOmegaAutomaton::new(
        dpa.alphabet.clone(),
        names,
        vec![dpa.initial()],
        trans,
        MarkKind::Buchi,
    )
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    /// NBA for "finitely many a" (not DBA-recognizable): guess the position
    /// after the last a.
    fn finitely_many_a() -> NondetOmegaAutomaton {
        NondetOmegaAutomaton::new(
            ab(),
            vec!["g".into(), "tail".into()],
            vec![0],
            vec![
                vec![
                    NTrans { symbol: 0, target: 0, mark: None },
                    NTrans { symbol: 1, target: 0, mark: None },
                    NTrans { symbol: 1, target: 1, mark: Some(0) },
                ],
                vec![NTrans { symbol: 1, target: 1, mark: Some(0) }],
            ],
            MarkKind::Buchi,
        )
        .unwrap()
    }

    #[test]
    fn determinize_finitely_many_a() {
        let dpa = determinize_nba(&finitely_many_a()).unwrap();
        assert!(dpa.is_complete());
        assert!(dpa.accepts_lasso(&w(&[], &[1])));
        assert!(dpa.accepts_lasso(&w(&[0, 0, 1, 0], &[1])));
        assert!(!dpa.accepts_lasso(&w(&[], &[0])));
        assert!(!dpa.accepts_lasso(&w(&[1], &[1, 0])));
        assert!(!dpa.accepts_lasso(&w(&[], &[0, 1])));
    }

    #[test]
    fn determinize_preserves_a_deterministic_language() {
        let dba = infinitely_many_a();
        let dpa = determinize_nba(&dba.to_nondet()).unwrap();
        for stem_len in 0..3 {
            for pat in [vec![0], vec![1], vec![0, 1], vec![1, 1, 0], vec![1, 1]] {
                for stem_sym in [0usize, 1] {
                    let word = w(&vec![stem_sym; stem_len], &pat);
                    assert_eq!(
                        dba.accepts_lasso(&word),
                        dpa.accepts_lasso(&word),
                        "disagree on {word:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn parity_to_nba_round_trip() {
        let dba = alternation();
        let dpa = determinize_nba(&dba.to_nondet()).unwrap();
        let nba = nba_of_parity(&dpa).unwrap();
        let dpa2 = determinize_nba(&nba).unwrap();
        for word in [
            w(&[], &[0, 1]),
            w(&[0], &[1, 0]),
            w(&[], &[0, 0, 1]),
            w(&[1], &[0, 1]),
            w(&[], &[1, 0]),
        ] {
            assert_eq!(dba.accepts_lasso(&word), dpa2.accepts_lasso(&word), "on {word:?}");
        }
    }

    #[test]
    fn priority_compression_keeps_order_and_parity() {
        let alphabet = ab();
        let aut = DetOmegaAutomaton::new(
            alphabet,
            vec!["x".into(), "y".into(), "z".into()],
            0,
            vec![
                vec![Some(1), Some(2)],
                vec![Some(1), Some(0)],
                vec![Some(2), Some(2)],
            ],
            Acceptance::Parity(vec![7, 10, 13]),
        )
        .unwrap();
        let small = compress_priorities(&aut);
        match small.acceptance() {
            Acceptance::Parity(pr) => assert_eq!(pr, &vec![1, 2, 3]),
            _ => unreachable!(),
        }
        for word in [w(&[], &[0]), w(&[], &[1]), w(&[0], &[0, 1])] {
            assert_eq!(aut.accepts_lasso(&word), small.accepts_lasso(&word));
        }
    }

    #[test]
    fn determinize_agrees_with_direct_acceptance_on_random_automata() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed());
        let words = enumerate_lassos(2, 2, 3);
        for _ in 0..60 {
            let nba = random_nondet(&mut rng, 4, 2, MarkKind::Buchi);
            let dpa = determinize_nba(&nba).unwrap();
            for word in &words {
                assert_eq!(
                    nba.accepts_lasso(word),
                    dpa.accepts_lasso(word),
                    "disagree on {word:?} for {nba:?}"
                );
            }
        }
    }

    #[test]
    fn parity_to_nba_agrees_with_direct_acceptance_on_random_automata() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed() ^ 1);
        let words = enumerate_lassos(2, 2, 3);
        for _ in 0..40 {
            // Random deterministic parity automaton: determinize a random
            // NBA, then strip to its reachable part via the constructor.
            let dpa = determinize_nba(&random_nondet(&mut rng, 3, 2, MarkKind::Buchi)).unwrap();
            let nba = nba_of_parity(&dpa).unwrap();
            for word in &words {
                assert_eq!(
                    dpa.accepts_lasso(word),
                    nba.accepts_lasso(word),
                    "disagree on {word:?}"
                );
            }
        }
    }

    #[test]
    fn dead_state_absorbs_partial_input() {
        // NBA with no transition on b at all: words containing b are
        // rejected through the dead state.
        let nba = NondetOmegaAutomaton::new(
            ab(),
            vec!["only".into()],
            vec![0],
            vec![vec![NTrans { symbol: 0, target: 0, mark: Some(0) }]],
            MarkKind::Buchi,
        )
        .unwrap();
        let dpa = determinize_nba(&nba).unwrap();
        assert!(dpa.is_complete());
        assert!(dpa.accepts_lasso(&w(&[], &[0])));
        assert!(!dpa.accepts_lasso(&w(&[1], &[0])));
        assert!(!dpa.accepts_lasso(&w(&[], &[0, 1])));
    }
}
