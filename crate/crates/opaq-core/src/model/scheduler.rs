//! Finite-memory schedulers and the Markov chain a scheduler induces.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{ActionId, ChainEdge, InducedChain, LabelId, LabeledMdp, MemoryId, Pomdp, StateId};
use crate::{Diagnostic, Error, Result};

/// A finite-memory randomized scheduler.
///
/// The scheduler owns a finite memory set; `choice` resolves the next action
/// from (memory, current state) and `update` moves the memory after seeing
/// the chosen action, the emitted label, and the successor state.  A missing
/// `update` entry means "keep the current memory", so memoryless schedulers
/// only need `choice` entries.
///
/// `observation_based` is a *claim* checked by [`Scheduler::validate_for`]:
/// choices must agree on equivalent states and updates must ignore the label
/// and distinguish successors only up to equivalence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheduler {
    memory: Vec<String>,
    initial_memory: MemoryId,
    observation_based: bool,
    choice: BTreeMap<(MemoryId, StateId), Vec<(ActionId, BigRational)>>,
    update: BTreeMap<(MemoryId, ActionId, LabelId, StateId), Vec<(MemoryId, BigRational)>>,
}

impl Scheduler {
    /// General constructor.  Entries are sorted; duplicate keys rejected.
    pub fn new(
        memory: Vec<String>,
        initial_memory: &str,
        observation_based: bool,
        choice: Vec<((String, StateId), Vec<(ActionId, BigRational)>)>,
        update: Vec<((String, ActionId, LabelId, StateId), Vec<(String, BigRational)>)>,
    ) -> Result<Scheduler> {
        if memory.is_empty() {
            return Err(Error::InvalidInput("scheduler needs at least one memory state".into()));
        }
        let mut sorted = memory.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != memory.len() {
            return Err(Error::InvalidInput("duplicate memory state name".into()));
        }
        let find_mem = |name: &str| -> Result<MemoryId> {
            memory
                .iter()
                .position(|m| m == name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown memory state {name:?}")))
        };
        let initial_memory = find_mem(initial_memory)?;
        let mut choice_map = BTreeMap::new();
        for ((m, q), mut dist) in choice {
            let m = find_mem(&m)?;
            dist.sort_by_key(|e| e.0);
            if choice_map.insert((m, q), dist).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate choice entry for memory {:?} and state {q}",
                    memory[m]
                )));
            }
        }
        let mut update_map = BTreeMap::new();
        for ((m, a, l, q), dist) in update {
            let m = find_mem(&m)?;
            let mut resolved = Vec::with_capacity(dist.len());
            for (m2, p) in dist {
                resolved.push((find_mem(&m2)?, p));
            }
            resolved.sort_by_key(|e| e.0);
            if update_map.insert((m, a, l, q), resolved).is_some() {
                return Err(Error::InvalidInput("duplicate update entry".into()));
            }
        }
        Ok(Scheduler {
            memory,
            initial_memory,
            observation_based,
            choice: choice_map,
            update: update_map,
        })
    }

    /// Deterministic memoryless scheduler given as (state, action) pairs.
    pub fn memoryless(choices: Vec<(StateId, ActionId)>) -> Scheduler {
        Scheduler {
            memory: vec!["m0".into()],
            initial_memory: 0,
            observation_based: false,
            choice: choices
                .into_iter()
                .map(|(q, a)| ((0, q), vec![(a, BigRational::one())]))
                .collect(),
            update: BTreeMap::new(),
        }
    }

    /// Deterministic memoryless scheduler given by names, for tests and
    /// hand-built witnesses.
    pub fn memoryless_from_names(mdp: &LabeledMdp, choices: &[(&str, &str)]) -> Result<Scheduler> {
        let mut resolved = Vec::with_capacity(choices.len());
        for (q, a) in choices {
            let q = mdp
                .state_id(q)
                .ok_or_else(|| Error::InvalidInput(format!("unknown state {q:?}")))?;
            let a = mdp
                .action_id(a)
                .ok_or_else(|| Error::InvalidInput(format!("unknown action {a:?}")))?;
            resolved.push((q, a));
        }
        Ok(Scheduler::memoryless(resolved))
    }

    /// The memoryless scheduler that mixes all enabled actions uniformly.
    pub fn uniform_memoryless(mdp: &LabeledMdp) -> Scheduler {
        let mut choice = BTreeMap::new();
        for q in 0..mdp.state_count() {
            let enabled = mdp.enabled_actions(q);
            if enabled.is_empty() {
                continue;
            }
            let p = BigRational::new(1.into(), (enabled.len() as i64).into());
            choice.insert((0, q), enabled.into_iter().map(|a| (a, p.clone())).collect());
        }
        Scheduler {
            memory: vec!["m0".into()],
            initial_memory: 0,
            observation_based: false,
            choice,
            update: BTreeMap::new(),
        }
    }

    pub fn memory_names(&self) -> &[String] {
        &self.memory
    }

    pub fn memory_count(&self) -> usize {
        self.memory.len()
    }

    pub fn initial_memory(&self) -> MemoryId {
        self.initial_memory
    }

    pub fn is_observation_based(&self) -> bool {
        self.observation_based
    }

    /// The action distribution in (memory, state).  An error here means the
    /// scheduler is not defined on a configuration it can actually reach.
    pub fn choice(&self, m: MemoryId, q: StateId) -> Result<&[(ActionId, BigRational)]> {
        self.choice
            .get(&(m, q))
            .map(|v| v.as_slice())
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "scheduler has no choice for memory {:?} and state {q}",
                    self.memory.get(m).map(String::as_str).unwrap_or("?")
                ))
            })
    }

    /// The memory distribution after observing `(action, label, successor)`;
    /// defaults to keeping the current memory.
    pub fn update(&self, m: MemoryId, a: ActionId, l: LabelId, q: StateId) -> Vec<(MemoryId, BigRational)> {
        self.update
            .get(&(m, a, l, q))
            .cloned()
            .unwrap_or_else(|| vec![(m, BigRational::one())])
    }

    /// Validates the scheduler against a model: distributions sum to 1 over
    /// enabled actions, and — when the scheduler claims to be observation
    /// based — decisions are invariant under the model's equivalence and
    /// updates ignore the emitted label.
    pub fn validate_for(&self, pomdp: &Pomdp) -> Vec<Diagnostic> {
        let mdp = pomdp.mdp();
        let mut out = Vec::new();
        for ((m, q), dist) in &self.choice {
            let at = format!("choice[{},{}]", self.memory[*m], mdp.state_name(*q));
            let enabled = mdp.enabled_actions(*q);
            let mut sum = BigRational::zero();
            for (a, p) in dist {
                if !enabled.contains(a) {
                    out.push(Diagnostic {
                        at: at.clone(),
                        message: format!("action {} is not enabled", mdp.action_name(*a)),
                    });
                }
                if *p < BigRational::zero() {
                    out.push(Diagnostic { at: at.clone(), message: "negative probability".into() });
                }
                sum += p;
            }
            if !sum.is_one() {
                out.push(Diagnostic {
                    at,
                    message: format!("choice distribution sums to {}", crate::format_ratio(&sum)),
                });
            }
        }
        for ((m, _, _, _), dist) in &self.update {
            let mut sum = BigRational::zero();
            for (_, p) in dist {
                sum += p;
            }
            if !sum.is_one() {
                out.push(Diagnostic {
                    at: format!("update[{}]", self.memory[*m]),
                    message: format!("update distribution sums to {}", crate::format_ratio(&sum)),
                });
            }
        }
        if self.observation_based {
            self.check_observation_invariance(pomdp, &mut out);
        }
        out
    }

    fn check_observation_invariance(&self, pomdp: &Pomdp, out: &mut Vec<Diagnostic>) {
        let mdp = pomdp.mdp();
        // Choices must agree across each equivalence class.
        for m in 0..self.memory.len() {
            for class in pomdp.classes() {
                let mut reference: Option<(&StateId, &Vec<(ActionId, BigRational)>)> = None;
                for q in class {
                    if let Some(dist) = self.choice.get(&(m, *q)) {
                        match reference {
                            None => reference = Some((q, dist)),
                            Some((q0, d0)) if d0 != dist => out.push(Diagnostic {
                                at: format!("choice[{}]", self.memory[m]),
                                message: format!(
                                    "equivalent states {} and {} receive different choices",
                                    mdp.state_name(*q0),
                                    mdp.state_name(*q)
                                ),
                            }),
                            _ => {}
                        }
                    }
                }
            }
        }
        // Updates must not depend on the label or on which class member was
        // reached.  The effective update (stored or the keep-memory default)
        // must be constant over label x class member.
        for m in 0..self.memory.len() {
            for a in 0..mdp.action_count() {
                for class in pomdp.classes() {
                    let mut reference: Option<Vec<(MemoryId, BigRational)>> = None;
                    let mut mixed = false;
                    for q in class {
                        for l in 0..mdp.label_count() {
                            let eff = self.update(m, a, l, *q);
                            match &reference {
                                None => reference = Some(eff),
                                Some(r) if *r != eff => mixed = true,
                                _ => {}
                            }
                        }
                    }
                    if mixed {
                        out.push(Diagnostic {
                            at: format!("update[{},{}]", self.memory[m], mdp.action_name(a)),
                            message: format!(
                                "memory update distinguishes labels or equivalent successors (class of {})",
                                mdp.state_name(class[0])
                            ),
                        });
                    }
                }
            }
        }
    }

    /// The labeled Markov chain over (memory, state) pairs that this
    /// scheduler induces on `mdp`, restricted to the reachable part.
    ///
    /// Edges keep the resolved action and emitted label, so omega-regular
    /// objectives over run symbols can be evaluated on the chain.
    pub fn induced_chain(&self, mdp: &LabeledMdp) -> Result<InducedChain> {
        let mut index: BTreeMap<(MemoryId, StateId), usize> = BTreeMap::new();
        let mut states = Vec::new();
        let mut edges: Vec<Vec<ChainEdge>> = Vec::new();
        let start = (self.initial_memory, mdp.initial());
        index.insert(start, 0);
        states.push(start);
        edges.push(Vec::new());
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let (m, q) = states[i];
            let mut out: BTreeMap<(ActionId, LabelId, MemoryId, StateId), BigRational> = BTreeMap::new();
            for (a, p_action) in self.choice(m, q)?.iter() {
                if p_action.is_zero() {
                    continue;
                }
                let dist = mdp.dist(q, *a).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "scheduler picks disabled action {} in state {}",
                        mdp.action_name(*a),
                        mdp.state_name(q)
                    ))
                })?;
                for (l, t, p_model) in dist {
                    for (m2, p_mem) in self.update(m, *a, *l, *t) {
                        let p = p_action * p_model * &p_mem;
                        if p.is_zero() {
                            continue;
                        }
                        *out.entry((*a, *l, m2, *t)).or_insert_with(BigRational::zero) += p;
                    }
                }
            }
            let mut resolved = Vec::with_capacity(out.len());
            for ((a, l, m2, t), p) in out {
                let key = (m2, t);
                let j = *index.entry(key).or_insert_with(|| {
                    states.push(key);
                    edges.push(Vec::new());
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                resolved.push(ChainEdge { action: a, label: l, target: j, prob: p });
            }
            edges[i] = resolved;
        }
        Ok(InducedChain { states, initial: 0, edges })
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn uniform_chain_on_fig1_mixes_rows() {
        let m = fig1_mdp();
        let sigma = Scheduler::uniform_memoryless(&m);
        let chain = sigma.induced_chain(&m).unwrap();
        assert_eq!(chain.states.len(), 4);
        let q0 = chain
            .states
            .iter()
            .position(|&(_, q)| m.state_name(q) == "q0")
            .unwrap();
        // From q0: alpha1 (weight 1/2) gives a:3/4,b:1/4 to q1; alpha2 gives
        // a:1/4,b:3/4 to q2.
        let a = m.label_id("a").unwrap();
        let b = m.label_id("b").unwrap();
        let into = |label: LabelId, state: &str| -> BigRational {
            chain.edges[q0]
                .iter()
                .filter(|e| e.label == label && m.state_name(chain.states[e.target].1) == state)
                .map(|e| e.prob.clone())
                .fold(BigRational::zero(), |acc, p| acc + p)
        };
        assert_eq!(into(a, "q1"), r(3, 8));
        assert_eq!(into(b, "q1"), r(1, 8));
        assert_eq!(into(a, "q2"), r(1, 8));
        assert_eq!(into(b, "q2"), r(3, 8));
    }

    #[test]
    fn deterministic_memoryless_chain_is_a_pruned_model() {
        let m = fig1_mdp();
        let sigma = Scheduler::memoryless_from_names(
            &m,
            &[("q0", "alpha1"), ("q0p", "alpha1"), ("q1", "beta1"), ("q2", "beta2")],
        )
        .unwrap();
        let chain = sigma.induced_chain(&m).unwrap();
        assert_eq!(chain.states.len(), 4);
        for (i, _) in chain.states.iter().enumerate() {
            let total: BigRational = chain.edges[i]
                .iter()
                .map(|e| e.prob.clone())
                .fold(BigRational::zero(), |acc, p| acc + p);
            assert!(total.is_one());
        }
    }

    #[test]
    fn observation_invariance_is_checked() {
        let p = fig1();
        let m = p.mdp();
        // q0 and q0p are equivalent but get different actions.
        let mut sigma = Scheduler::memoryless_from_names(
            m,
            &[("q0", "alpha1"), ("q0p", "alpha2"), ("q1", "beta1"), ("q2", "beta2")],
        )
        .unwrap();
        sigma.observation_based = true;
        let ds = sigma.validate_for(&p);
        assert!(ds.iter().any(|d| d.message.contains("different choices")), "{ds:?}");

        let mut sigma = Scheduler::memoryless_from_names(
            m,
            &[("q0", "alpha1"), ("q0p", "alpha1"), ("q1", "beta1"), ("q2", "beta2")],
        )
        .unwrap();
        sigma.observation_based = true;
        assert!(sigma.validate_for(&p).is_empty());
    }

    #[test]
    fn label_sensitive_update_fails_observation_check() {
        let p = fig1();
        let m = p.mdp();
        let a = m.label_id("a").unwrap();
        let q1 = m.state_id("q1").unwrap();
        let alpha1 = m.action_id("alpha1").unwrap();
        let sigma = Scheduler::new(
            vec!["m0".into(), "m1".into()],
            "m0",
            true,
            (0..m.state_count())
                .map(|q| {
                    let act = m.enabled_actions(q)[0];
                    vec![
                        (("m0".to_string(), q), vec![(act, BigRational::one())]),
                        (("m1".to_string(), q), vec![(act, BigRational::one())]),
                    ]
                })
                .flatten()
                .collect(),
            vec![(("m0".to_string(), alpha1, a, q1), vec![("m1".to_string(), BigRational::one())])],
        )
        .unwrap();
        let ds = sigma.validate_for(&p);
        assert!(ds.iter().any(|d| d.message.contains("distinguishes labels")), "{ds:?}");
    }
}
