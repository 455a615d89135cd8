//! Labeled Markov decision processes and their partially observable variant.
//!
//! A labeled MDP has a finite state set, a finite label alphabet, and per
//! state a set of enabled actions; each enabled action yields an exact
//! rational distribution over (label, successor) pairs.  Runs alternate
//! states and (action, label) steps.  The partially observable variant adds
//! an equivalence relation on states; equivalent states must enable the same
//! actions so a scheduler that only sees equivalence classes is always able
//! to act.
//!
//! States, labels, and actions are interned: the constructor sorts the name
//! tables and every later iteration follows index order, which makes all
//! downstream analyses deterministic.

mod chain;
mod format;
mod scheduler;

pub use chain::{ChainEdge, InducedChain};
pub(crate) use chain::chain_components;
pub use format::{parse_model, print_model, ParsedModel, RawProjection};
pub use scheduler::Scheduler;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Diagnostic, Error, Result};

pub type StateId = usize;
pub type ActionId = usize;
pub type LabelId = usize;
pub type ClassId = usize;
pub type MemoryId = usize;

/// One enabled action of a state together with its outcome distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionRow {
    pub action: ActionId,
    /// Outcomes sorted by (label, target); probabilities are kept verbatim so
    /// that invalid distributions can be represented and then diagnosed.
    pub dist: Vec<(LabelId, StateId, BigRational)>,
}

/// A labeled Markov decision process under perfect observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMdp {
    states: Vec<String>,
    labels: Vec<String>,
    actions: Vec<String>,
    initial: StateId,
    /// Per state, enabled actions sorted by action id.
    rows: Vec<Vec<ActionRow>>,
}

fn check_name(kind: &str, name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\'' | '-'));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{kind} name {name:?} is not allowed; names use letters, digits, and _ . ' -"
        )))
    }
}

fn intern(kind: &str, names: Vec<String>) -> Result<Vec<String>> {
    let mut sorted = names;
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidInput(format!("duplicate {kind} name {:?}", w[0])));
        }
    }
    for n in &sorted {
        check_name(kind, n)?;
    }
    Ok(sorted)
}

impl LabeledMdp {
    /// Builds a model from name-based parts.
    ///
    /// Name tables are sorted and duplicate names rejected.  Transition rows
    /// are `(from, action, [(label, to, prob)])`; listing the same
    /// (from, action) twice or the same (label, to) twice within one row is
    /// rejected as ambiguous.  Semantic problems that a file can
    /// legitimately express (distributions that do not sum to 1, deadlocked
    /// states) are *not* rejected here; [`LabeledMdp::validate`] reports
    /// them.
    pub fn new(
        states: Vec<String>,
        labels: Vec<String>,
        actions: Vec<String>,
        initial: &str,
        transitions: Vec<(String, String, Vec<(String, String, BigRational)>)>,
    ) -> Result<LabeledMdp> {
        let states = intern("state", states)?;
        let labels = intern("label", labels)?;
        let actions = intern("action", actions)?;
        let find = |table: &[String], kind: &str, name: &str| -> Result<usize> {
            table
                .binary_search_by(|probe| probe.as_str().cmp(name))
                .map_err(|_| Error::InvalidInput(format!("unknown {kind} name {name:?}")))
        };
        let initial = find(&states, "state", initial)?;
        let mut rows: Vec<Vec<ActionRow>> = vec![Vec::new(); states.len()];
        for (from, action, dist) in transitions {
            let from = find(&states, "state", &from)?;
            let action = find(&actions, "action", &action)?;
            if rows[from].iter().any(|r| r.action == action) {
                return Err(Error::InvalidInput(format!(
                    "duplicate transition row for state {:?} and action {:?}",
                    states[from], actions[action]
                )));
            }
            let mut resolved = Vec::with_capacity(dist.len());
            for (label, to, prob) in dist {
                let label = find(&labels, "label", &label)?;
                let to = find(&states, "state", &to)?;
                resolved.push((label, to, prob));
            }
            resolved.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            for w in resolved.windows(2) {
                if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                    return Err(Error::InvalidInput(format!(
                        "state {:?}, action {:?}: outcome ({}, {}) listed twice",
                        states[from], actions[action], labels[w[0].0], states[w[0].1]
                    )));
                }
            }
            rows[from].push(ActionRow { action, dist: resolved });
        }
        for r in &mut rows {
            r.sort_by_key(|row| row.action);
        }
        Ok(LabeledMdp { states, labels, actions, initial, rows })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q]
    }

    pub fn label_name(&self, l: LabelId) -> &str {
        &self.labels[l]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn label_names(&self) -> &[String] {
        &self.labels
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.binary_search_by(|p| p.as_str().cmp(name)).ok()
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.binary_search_by(|p| p.as_str().cmp(name)).ok()
    }

    pub fn label_id(&self, name: &str) -> Option<LabelId> {
        self.labels.binary_search_by(|p| p.as_str().cmp(name)).ok()
    }

    /// All transition rows of a state, sorted by action.
    pub fn rows(&self, q: StateId) -> &[ActionRow] {
        &self.rows[q]
    }

    /// Actions enabled in `q`, in sorted order.
    pub fn enabled_actions(&self, q: StateId) -> Vec<ActionId> {
        self.rows[q].iter().map(|r| r.action).collect()
    }

    /// The outcome distribution of `(q, action)`, if the action is enabled.
    pub fn dist(&self, q: StateId, action: ActionId) -> Option<&[(LabelId, StateId, BigRational)]> {
        self.rows[q]
            .iter()
            .find(|r| r.action == action)
            .map(|r| r.dist.as_slice())
    }

    /// Probability of the single outcome `(label, to)` under `(q, action)`.
    pub fn prob(&self, q: StateId, action: ActionId, label: LabelId, to: StateId) -> BigRational {
        self.dist(q, action)
            .and_then(|d| {
                d.iter()
                    .find(|(l, t, _)| (*l, *t) == (label, to))
                    .map(|(_, _, p)| p.clone())
            })
            .unwrap_or_else(BigRational::zero)
    }

    /// Checks the semantic invariants: every distribution sums to exactly 1
    /// with positive entries, and every state enables at least one action
    /// (deadlock freedom).  Returns all findings rather than the first.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (q, rows) in self.rows.iter().enumerate() {
            if rows.is_empty() {
                out.push(Diagnostic {
                    at: format!("states[{}]", self.states[q]),
                    message: "deadlocked: no enabled action".into(),
                });
            }
            for row in rows {
                let at = format!("transitions[{}][{}]", self.states[q], self.actions[row.action]);
                let mut sum = BigRational::zero();
                for (l, t, p) in &row.dist {
                    if *p <= BigRational::zero() {
                        out.push(Diagnostic {
                            at: format!("{at}[{},{}]", self.labels[*l], self.states[*t]),
                            message: format!("non-positive probability {}", crate::format_ratio(p)),
                        });
                    }
                    sum += p;
                }
                if !sum.is_one() {
                    out.push(Diagnostic {
                        at,
                        message: format!("distribution sum {} != 1", crate::format_ratio(&sum)),
                    });
                }
            }
        }
        out
    }

    /// Convenience: validates and converts findings into an error.
    pub fn require_valid(&self) -> Result<()> {
        let ds = self.validate();
        if ds.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(ds))
        }
    }

    /// States reachable from the initial state through positive-probability
    /// transitions, in ascending order.
    pub fn reachable_states(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.states.len()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = stack.pop() {
            for row in &self.rows[q] {
                for &(_, t, ref p) in &row.dist {
                    if *p > BigRational::zero() && !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        (0..self.states.len()).filter(|&q| seen[q]).collect()
    }
}

/// A labeled MDP observed through a state equivalence.
///
/// The equivalence captures what a scheduler can distinguish: runs whose
/// state sequences are pointwise equivalent and whose action sequences agree
/// must receive the same decisions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pomdp {
    mdp: LabeledMdp,
    class_of: Vec<ClassId>,
    classes: Vec<Vec<StateId>>,
}

impl Pomdp {
    /// Wraps a model with an equivalence given as a list of classes (state
    /// names).  The classes must partition the state set exactly.
    pub fn new(mdp: LabeledMdp, equivalence: Vec<Vec<String>>) -> Result<Pomdp> {
        let n = mdp.state_count();
        let mut resolved: Vec<Vec<StateId>> = Vec::with_capacity(equivalence.len());
        let mut seen: BTreeSet<StateId> = BTreeSet::new();
        for (i, class) in equivalence.iter().enumerate() {
            let mut ids = Vec::with_capacity(class.len());
            for name in class {
                let q = mdp.state_id(name).ok_or_else(|| {
                    Error::InvalidInput(format!("equivalence[{i}]: unknown state name {name:?}"))
                })?;
                if !seen.insert(q) {
                    return Err(Error::InvalidInput(format!(
                        "equivalence: state {name:?} appears in more than one class"
                    )));
                }
                ids.push(q);
            }
            if ids.is_empty() {
                return Err(Error::InvalidInput(format!("equivalence[{i}]: empty class")));
            }
            ids.sort_unstable();
            resolved.push(ids);
        }
        if seen.len() != n {
            let missing: Vec<&str> = (0..n)
                .filter(|q| !seen.contains(q))
                .map(|q| mdp.state_name(q))
                .collect();
            return Err(Error::InvalidInput(format!(
                "equivalence does not cover states: {}",
                missing.join(", ")
            )));
        }
        resolved.sort_by_key(|c| c[0]);
        let mut class_of = vec![0usize; n];
        for (c, members) in resolved.iter().enumerate() {
            for &q in members {
                class_of[q] = c;
            }
        }
        Ok(Pomdp { mdp, class_of, classes: resolved })
    }

    /// The identity equivalence: perfect observation expressed as a
    /// partially observable model.
    pub fn perfect(mdp: LabeledMdp) -> Pomdp {
        let classes: Vec<Vec<StateId>> = (0..mdp.state_count()).map(|q| vec![q]).collect();
        let class_of = (0..mdp.state_count()).collect();
        Pomdp { mdp, class_of, classes }
    }

    pub fn mdp(&self) -> &LabeledMdp {
        &self.mdp
    }

    pub fn class_of(&self, q: StateId) -> ClassId {
        self.class_of[q]
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_members(&self, c: ClassId) -> &[StateId] {
        &self.classes[c]
    }

    pub fn classes(&self) -> &[Vec<StateId>] {
        &self.classes
    }

    pub fn same_class(&self, p: StateId, q: StateId) -> bool {
        self.class_of[p] == self.class_of[q]
    }

    pub fn is_perfect_observation(&self) -> bool {
        self.classes.iter().all(|c| c.len() == 1)
    }

    /// Model diagnostics plus the observability invariant: equivalent states
    /// must enable the same action sets.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = self.mdp.validate();
        for members in &self.classes {
            let reference = self.mdp.enabled_actions(members[0]);
            for &q in &members[1..] {
                let here = self.mdp.enabled_actions(q);
                if here != reference {
                    out.push(Diagnostic {
                        at: format!(
                            "equivalence[{} ~ {}]",
                            self.mdp.state_name(members[0]),
                            self.mdp.state_name(q)
                        ),
                        message: format!(
                            "equivalent states enable different action sets ({} vs {})",
                            name_list(&self.mdp, &reference),
                            name_list(&self.mdp, &here)
                        ),
                    });
                }
            }
        }
        out
    }

    pub fn require_valid(&self) -> Result<()> {
        let ds = self.validate();
        if ds.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(ds))
        }
    }
}

fn name_list(mdp: &LabeledMdp, actions: &[ActionId]) -> String {
    if actions.is_empty() {
        return "none".into();
    }
    actions
        .iter()
        .map(|&a| mdp.action_name(a))
        .collect::<Vec<_>>()
        .join(",")
}

/// One step of a run: the chosen action, the emitted label, the successor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Step {
    pub action: ActionId,
    pub label: LabelId,
    pub target: StateId,
}

/// A finite run prefix `q0 (a0,l0) q1 ... qn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteRun {
    pub start: StateId,
    pub steps: Vec<Step>,
}

impl FiniteRun {
    pub fn end(&self) -> StateId {
        self.steps.last().map_or(self.start, |s| s.target)
    }

    /// The sequence of states visited, including the start.
    pub fn states(&self) -> Vec<StateId> {
        std::iter::once(self.start)
            .chain(self.steps.iter().map(|s| s.target))
            .collect()
    }

    /// Checks that every step uses an enabled action with positive
    /// probability in `mdp`.
    pub fn validate(&self, mdp: &LabeledMdp) -> Result<()> {
        let mut q = self.start;
        if q >= mdp.state_count() {
            return Err(Error::InvalidInput("run starts at unknown state".into()));
        }
        for (i, s) in self.steps.iter().enumerate() {
            let p = mdp.prob(q, s.action, s.label, s.target);
            if p <= BigRational::zero() {
                return Err(Error::InvalidInput(format!(
                    "run step {i}: transition {} -({},{})-> {} has probability 0",
                    mdp.state_name(q),
                    mdp.action_name(s.action),
                    mdp.label_name(s.label),
                    mdp.state_name(s.target)
                )));
            }
            q = s.target;
        }
        Ok(())
    }
}

/// An ultimately periodic run `stem . cycle^omega`.
///
/// The cycle starts at the stem's final state and returns to it; it must be
/// non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoRun {
    pub stem: FiniteRun,
    pub cycle: Vec<Step>,
}

impl LassoRun {
    pub fn validate(&self, mdp: &LabeledMdp) -> Result<()> {
        self.stem.validate(mdp)?;
        if self.cycle.is_empty() {
            return Err(Error::InvalidInput("lasso cycle is empty".into()));
        }
        let junction = self.stem.end();
        if self.cycle.last().unwrap().target != junction {
            return Err(Error::InvalidInput(
                "lasso cycle does not return to the stem's final state".into(),
            ));
        }
        let unrolled = FiniteRun { start: junction, steps: self.cycle.clone() };
        unrolled.validate(mdp)
    }

    /// States visited along the cycle (the junction appears once, as the
    /// final target).
    pub fn cycle_states(&self) -> Vec<StateId> {
        self.cycle.iter().map(|s| s.target).collect()
    }
}

/// The probability that a run starts with the finite prefix `run` when the
/// scheduler `sigma` resolves actions.
///
/// For a finite-memory scheduler this marginalizes over memory evolutions:
/// the transition probabilities factor out of the memory recursion, so the
/// result is the product of model probabilities times the total weight of
/// memory paths consistent with the prefix.
pub fn cone_probability(mdp: &LabeledMdp, sigma: &Scheduler, run: &FiniteRun) -> Result<BigRational> {
    run.validate(mdp)?;
    let mut weights: BTreeMap<MemoryId, BigRational> = BTreeMap::new();
    weights.insert(sigma.initial_memory(), BigRational::one());
    let mut model_part = BigRational::one();
    let mut q = run.start;
    for step in &run.steps {
        model_part *= mdp.prob(q, step.action, step.label, step.target);
        let mut next: BTreeMap<MemoryId, BigRational> = BTreeMap::new();
        for (&m, w) in &weights {
            let p_action = sigma
                .choice(m, q)?
                .iter()
                .find(|(a, _)| *a == step.action)
                .map(|(_, p)| p.clone())
                .unwrap_or_else(BigRational::zero);
            if p_action.is_zero() {
                continue;
            }
            for (m2, p_mem) in sigma.update(m, step.action, step.label, step.target) {
                let contribution = w * &p_action * &p_mem;
                if !contribution.is_zero() {
                    *next.entry(m2).or_insert_with(BigRational::zero) += contribution;
                }
            }
        }
        weights = next;
        if weights.is_empty() {
            return Ok(BigRational::zero());
        }
        q = step.target;
    }
    let memory_part: BigRational = weights.values().fold(BigRational::zero(), |acc, w| acc + w);
    Ok(model_part * memory_part)
}
