//! Exact omega-regular analysis of finite Markov chains.
//!
//! A finite chain almost surely enters one of its bottom strongly connected
//! components and then visits every state of that component infinitely
//! often.  The probability of a parity objective is therefore the
//! probability of reaching a bottom component whose minimum priority is
//! even, which reduces to one exact linear system over the transient states.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{ActionId, LabelId, MemoryId, StateId};
use crate::linalg;

/// One transition of an induced chain, keeping the resolved action and the
/// emitted label so run-alphabet objectives can be evaluated downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainEdge {
    pub action: ActionId,
    pub label: LabelId,
    pub target: usize,
    pub prob: BigRational,
}

/// The reachable Markov chain induced by a scheduler on a model.
///
/// States are (memory, model state) pairs; index 0 is initial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedChain {
    pub states: Vec<(MemoryId, StateId)>,
    pub initial: usize,
    pub edges: Vec<Vec<ChainEdge>>,
}

impl InducedChain {
    /// Strongly connected components in a deterministic order (Tarjan,
    /// iterative).  Components are returned with sorted member lists.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        tarjan(self.states.len(), |v| self.edges[v].iter().map(|e| e.target))
    }

    /// Indices of the bottom SCCs (no edge leaves the component) among
    /// `sccs`.
    pub fn bottom_sccs(&self, sccs: &[Vec<usize>]) -> Vec<usize> {
        let mut comp_of = vec![0usize; self.states.len()];
        for (c, members) in sccs.iter().enumerate() {
            for &v in members {
                comp_of[v] = c;
            }
        }
        (0..sccs.len())
            .filter(|&c| {
                sccs[c]
                    .iter()
                    .all(|&v| self.edges[v].iter().all(|e| comp_of[e.target] == c))
            })
            .collect()
    }

    /// Exact probability that a run satisfies the parity objective given by
    /// per-chain-state priorities (minimum priority seen infinitely often is
    /// even).
    ///
    /// Works on the reachable chain as built; `priorities[i]` is the
    /// priority of chain state `i`.
    pub fn omega_probability(&self, priorities: &[u32]) -> BigRational {
        assert_eq!(priorities.len(), self.states.len());
        let n = self.states.len();
        let sccs = self.sccs();
        let bottoms = self.bottom_sccs(&sccs);
        // Value of each state inside a bottom SCC: 1 if the component's
        // minimum priority is even, else 0.
        let mut fixed: Vec<Option<BigRational>> = vec![None; n];
        for &c in &bottoms {
            let min = sccs[c].iter().map(|&v| priorities[v]).min().unwrap();
            let value = if min % 2 == 0 { BigRational::one() } else { BigRational::zero() };
            for &v in &sccs[c] {
                fixed[v] = Some(value.clone());
            }
        }
        let transient: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();
        if transient.is_empty() {
            return fixed[self.initial].clone().unwrap();
        }
        let pos: std::collections::BTreeMap<usize, usize> =
            transient.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let m = transient.len();
        // x = P_tt x + r  =>  (I - P_tt) x = r.
        let mut a = vec![vec![BigRational::zero(); m]; m];
        let mut b = vec![BigRational::zero(); m];
        for (i, &v) in transient.iter().enumerate() {
            a[i][i] = BigRational::one();
            for e in &self.edges[v] {
                match &fixed[e.target] {
                    Some(value) => b[i] += &e.prob * value,
                    None => {
                        let j = pos[&e.target];
                        a[i][j] -= &e.prob;
                    }
                }
            }
        }
        let x = linalg::solve(a, b).expect("transient system of a finite chain is non-singular");
        match &fixed[self.initial] {
            Some(v) => v.clone(),
            None => x[pos[&self.initial]].clone(),
        }
    }

    /// Graph-only check that the parity objective holds almost surely:
    /// every bottom SCC of the reachable chain must be accepting.
    pub fn almost_sure(&self, priorities: &[u32]) -> bool {
        assert_eq!(priorities.len(), self.states.len());
        let sccs = self.sccs();
        self.bottom_sccs(&sccs)
            .into_iter()
            .all(|c| sccs[c].iter().map(|&v| priorities[v]).min().unwrap() % 2 == 0)
    }

    /// Lifts a predicate on (memory, model state) pairs to Buchi priorities:
    /// accepting pairs get 0, all others 1.
    pub fn buchi_priorities(&self, accept: impl Fn(MemoryId, StateId) -> bool) -> Vec<u32> {
        self.states
            .iter()
            .map(|&(m, q)| if accept(m, q) { 0 } else { 1 })
            .collect()
    }
}

/// Iterative Tarjan SCC over an implicit graph; components come out in a
/// deterministic order and with sorted members.
pub(crate) fn tarjan<I, F>(n: usize, successors: F) -> Vec<Vec<usize>>
where
    I: Iterator<Item = usize>,
    F: Fn(usize) -> I,
{
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut components: Vec<Vec<usize>> = Vec::new();
    // Explicit DFS: (node, resume-iterator state).
    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        let mut call: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        let succs: Vec<usize> = successors(root).collect();
        call.push((root, succs, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some((v, succs, mut i)) = call.pop() {
            let mut descended = false;
            while i < succs.len() {
                let w = succs[i];
                i += 1;
                if index[w] == UNSET {
                    // Descend into w, then resume v at position i.
                    call.push((v, succs, i));
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    let wsuccs: Vec<usize> = successors(w).collect();
                    call.push((w, wsuccs, 0));
                    descended = true;
                    break;
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            }
            if descended {
                continue;
            }
            // v is finished.
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
            if let Some((parent, _, _)) = call.last() {
                let parent = *parent;
                low[parent] = low[parent].min(low[v]);
            }
        }
    }
    components.sort_by_key(|c| c[0]);
    components
}

/// Strongly connected components of the subgraph induced by the `allowed`
/// states: successors are filtered against the mask and components of
/// disallowed states are dropped from the result.
pub(crate) fn chain_components(
    n: usize,
    allowed: &[bool],
    successors: impl Fn(usize) -> Vec<usize>,
) -> Vec<Vec<usize>> {
    tarjan(n, |q| {
        let succ = if allowed[q] { successors(q) } else { Vec::new() };
        succ.into_iter().filter(|&t| allowed[t]).collect::<Vec<_>>().into_iter()
    })
    .into_iter()
    .filter(|c| allowed[c[0]])
    .collect()
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::Scheduler;
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn chain_of(mdp: &super::super::LabeledMdp) -> InducedChain {
        Scheduler::uniform_memoryless(mdp).induced_chain(mdp).unwrap()
    }

    #[test]
    fn two_absorbing_components_split_mass() {
        // `half`: the a-branch loop and the b-branch loop are each reached
        // with probability 1/2; accept only the o1 loop.
        let m = half();
        let chain = chain_of(&m);
        let s1 = m.state_id("s1").unwrap();
        let pr = chain.buchi_priorities(|_, q| q == s1);
        assert_eq!(chain.omega_probability(&pr), r(1, 2));
        assert!(!chain.almost_sure(&pr));
    }

    #[test]
    fn whole_chain_recurrent_accepts_with_probability_one() {
        let m = fig1_mdp();
        let chain = chain_of(&m);
        let q1 = m.state_id("q1").unwrap();
        let pr = chain.buchi_priorities(|_, q| q == q1);
        // The uniform chain is a single bottom SCC that contains q1.
        assert_eq!(chain.omega_probability(&pr), r(1, 1));
        assert!(chain.almost_sure(&pr));
    }

    #[test]
    fn unreachable_target_gets_zero() {
        let m = half();
        let chain = chain_of(&m);
        let pr = chain.buchi_priorities(|_, _| false);
        assert_eq!(chain.omega_probability(&pr), r(0, 1));
    }

    #[test]
    fn tarjan_finds_nested_components() {
        // 0 -> 1 -> 2 -> 1, 0 -> 0 (self loop).
        let edges = vec![vec![0, 1], vec![2], vec![1]];
        let comps = tarjan(3, |v| edges[v].iter().copied());
        assert!(comps.contains(&vec![0]));
        assert!(comps.contains(&vec![1, 2]));
        assert_eq!(comps.len(), 2);
    }

    #[test]
    fn parity_uses_minimum_priority() {
        let m = fig1_mdp();
        let chain = chain_of(&m);
        // Priority 1 everywhere except priority 2 on q1: min inf = 1, odd.
        let q1 = m.state_id("q1").unwrap();
        let pr: Vec<u32> = chain.states.iter().map(|&(_, q)| if q == q1 { 2 } else { 1 }).collect();
        assert_eq!(chain.omega_probability(&pr), r(0, 1));
        // Flip: priority 0 on q1 dominates.
        let pr: Vec<u32> = chain.states.iter().map(|&(_, q)| if q == q1 { 0 } else { 1 }).collect();
        assert_eq!(chain.omega_probability(&pr), r(1, 1));
    }
}
