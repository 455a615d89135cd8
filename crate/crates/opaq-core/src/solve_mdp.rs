//! Exact maximal-probability solving for parity objectives on labeled MDPs.
//!
//! The pipeline is the classical one: find the end components in which the
//! parity condition can be won almost surely, then maximize the probability
//! of reaching their union.  Reachability values are computed by policy
//! iteration over exact rationals — each candidate policy is evaluated by
//! solving its induced chain's linear system, so improvement is genuinely
//! monotone and the final vector is the least Bellman fixpoint, i.e. the
//! true optimum.  Every result ships with a finite-memory scheduler whose
//! induced chain is re-analyzed independently; the reported value and the
//! certified value must agree as rationals.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::model::{chain_components, LabeledMdp, Scheduler, StateId};
use crate::{Error, Result};

/// An end component: a set of states together with, per state, the action
/// rows whose full support stays inside the set; the induced subgraph is
/// strongly connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndComponent {
    pub states: Vec<StateId>,
    /// Parallel to `states`: indices into `mdp.rows(state)`.
    pub rows: Vec<BTreeSet<usize>>,
}

impl EndComponent {
    pub fn contains(&self, q: StateId) -> bool {
        self.states.binary_search(&q).is_ok()
    }

    fn rows_of(&self, q: StateId) -> &BTreeSet<usize> {
        let i = self.states.binary_search(&q).expect("state in component");
        &self.rows[i]
    }
}

type Allowed = BTreeMap<StateId, BTreeSet<usize>>;

/// Maximal end components of the sub-MDP spanned by `allowed`.
fn mec_decomposition_restricted(mdp: &LabeledMdp, allowed: &Allowed) -> Vec<EndComponent> {
    let mut result = Vec::new();
    let mut work: Vec<Allowed> = vec![allowed.clone()];
    while let Some(mut piece) = work.pop() {
        // Stabilize: drop rows leaving the piece, then states without rows.
        loop {
            let states: BTreeSet<StateId> = piece.keys().copied().collect();
            let mut changed = false;
            piece.retain(|&q, rows| {
                rows.retain(|&r| {
                    mdp.rows(q)[r].dist.iter().all(|&(_, t, _)| states.contains(&t))
                });
                if rows.is_empty() {
                    changed = true;
                    false
                } else {
                    true
                }
            });
            if !changed {
                break;
            }
        }
        if piece.is_empty() {
            continue;
        }
        let states: Vec<StateId> = piece.keys().copied().collect();
        let index: BTreeMap<StateId, usize> =
            states.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let n = states.len();
        let allowed_mask = vec![true; n];
        let comps = chain_components(n, &allowed_mask, |i| {
            let q = states[i];
            let mut out = Vec::new();
            for &r in &piece[&q] {
                for &(_, t, _) in &mdp.rows(q)[r].dist {
                    out.push(index[&t]);
                }
            }
            out
        });
        if comps.len() == 1 && comps[0].len() == n {
            // Strongly connected with every remaining row staying inside:
            // this piece is a maximal end component, unless it is a single
            // state without a self-loop — impossible here, because rows
            // leaving were pruned and the state kept at least one row.
            let rows = states.iter().map(|q| piece[q].clone()).collect();
            result.push(EndComponent { states, rows });
        } else {
            for comp in comps {
                let members: BTreeSet<StateId> = comp.iter().map(|&i| states[i]).collect();
                // A singleton without any self-looping row cannot become an
                // end component; the stabilization loop will drop it.
                let sub: Allowed =
                    members.iter().map(|&q| (q, piece[&q].clone())).collect();
                work.push(sub);
            }
        }
    }
    result.sort_by_key(|c| c.states[0]);
    result
}

fn all_rows(mdp: &LabeledMdp) -> Allowed {
    (0..mdp.state_count())
        .map(|q| (q, (0..mdp.rows(q).len()).collect()))
        .collect()
}

/// Maximal end components of the whole MDP.
pub fn mec_decomposition(mdp: &LabeledMdp) -> Vec<EndComponent> {
    mec_decomposition_restricted(mdp, &all_rows(mdp))
}

/// Disjoint end components inside which the min-even parity condition can
/// be won almost surely: an end component whose minimum priority is even
/// wins outright; one with an odd minimum may still hide winning
/// sub-components that avoid the offending states.
pub fn winning_end_components(mdp: &LabeledMdp, priorities: &[u32]) -> Vec<EndComponent> {
    assert_eq!(priorities.len(), mdp.state_count());
    let mut out = Vec::new();
    let mut work: Vec<Allowed> = vec![all_rows(mdp)];
    while let Some(piece) = work.pop() {
        for mec in mec_decomposition_restricted(mdp, &piece) {
            let pmin = mec.states.iter().map(|&q| priorities[q]).min().unwrap();
            if pmin % 2 == 0 {
                out.push(mec);
            } else {
                let sub: Allowed = mec
                    .states
                    .iter()
                    .zip(&mec.rows)
                    .filter(|&(&q, _)| priorities[q] != pmin)
                    .map(|(&q, rows)| (q, rows.clone()))
                    .collect();
                if !sub.is_empty() {
                    work.push(sub);
                }
            }
        }
    }
    out.sort_by_key(|c| c.states[0]);
    out
}

/// Exact maximal reachability probabilities and a memoryless optimal
/// policy (one row index per state).
#[derive(Debug, Clone)]
pub struct Reachability {
    pub values: Vec<BigRational>,
    pub rows: Vec<usize>,
}

/// Evaluates a fixed memoryless policy: the exact probability, per state,
/// of reaching `target` in the induced chain (target states absorbing).
fn evaluate_policy(
    mdp: &LabeledMdp,
    policy: &[usize],
    target: &[bool],
) -> Result<Vec<BigRational>> {
    let n = mdp.state_count();
    // States that can reach the target inside the chain.
    let mut can = target.to_vec();
    loop {
        let mut changed = false;
        for q in 0..n {
            if can[q] || target[q] {
                continue;
            }
            let row = &mdp.rows(q)[policy[q]];
            if row.dist.iter().any(|&(_, t, _)| can[t]) {
                can[q] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let unknown: Vec<StateId> = (0..n).filter(|&q| can[q] && !target[q]).collect();
    let index: BTreeMap<StateId, usize> =
        unknown.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let m = unknown.len();
    let mut a = vec![vec![BigRational::zero(); m]; m];
    let mut b = vec![BigRational::zero(); m];
    for (i, &q) in unknown.iter().enumerate() {
        a[i][i] = BigRational::one();
        for &(_, t, ref p) in &mdp.rows(q)[policy[q]].dist {
            if target[t] {
                b[i] += p;
            } else if let Some(&j) = index.get(&t) {
                a[i][j] -= p;
            }
        }
    }
    let x = crate::linalg::solve(a, b).ok_or_else(|| {
        Error::InvalidInput("internal: policy evaluation system is singular".into())
    })?;
    let mut values = vec![BigRational::zero(); n];
    for q in 0..n {
        if target[q] {
            values[q] = BigRational::one();
        }
    }
    for (i, &q) in unknown.iter().enumerate() {
        values[q] = x[i].clone();
    }
    Ok(values)
}

/// Maximal probability of reaching `target`, by policy iteration with
/// exact evaluation.  Only strictly improving switches are taken, so the
/// value vector increases monotonically and the iteration terminates in
/// the true optimum.
pub fn max_reachability(mdp: &LabeledMdp, target: &[bool]) -> Result<Reachability> {
    let n = mdp.state_count();
    assert_eq!(target.len(), n);
    let mut policy: Vec<usize> = vec![0; n];
    loop {
        let values = evaluate_policy(mdp, &policy, target)?;
        let mut improved = false;
        for q in 0..n {
            if target[q] {
                continue;
            }
            let mut best = values[q].clone();
            let mut best_row = policy[q];
            for (r, row) in mdp.rows(q).iter().enumerate() {
                let mut v = BigRational::zero();
                for &(_, t, ref p) in &row.dist {
                    v += p * &values[t];
                }
                if v > best {
                    best = v;
                    best_row = r;
                }
            }
            if best_row != policy[q] {
                policy[q] = best_row;
                improved = true;
            }
        }
        if !improved {
            return Ok(Reachability { values, rows: policy });
        }
    }
}

/// Exact maximal probability of satisfying a min-even parity condition,
/// with an optimal memoryless scheduler and an independently verified
/// certificate.
#[derive(Debug, Clone)]
pub struct ParityOutcome {
    /// Per-state optimal values.
    pub values: Vec<BigRational>,
    /// The value at the initial state.
    pub value: BigRational,
    /// Optimal memoryless policy, as a row index per state.
    pub rows: Vec<usize>,
    /// Mask of states inside winning end components.
    pub winning_states: Vec<bool>,
    /// The scheduler built from `rows`.
    pub scheduler: Scheduler,
}

/// Computes the maximal parity probability: winning end components first,
/// then maximal reachability of their union; inside each winning component
/// the policy walks toward the minimum-priority states, which makes every
/// closed recurrent class of the induced chain contain one.
///
/// Before returning, the scheduler is run through the independent chain
/// analysis; a certificate mismatch is reported as an error rather than
/// silently returning an unverified number.
pub fn max_parity(mdp: &LabeledMdp, priorities: &[u32]) -> Result<ParityOutcome> {
    let n = mdp.state_count();
    let wecs = winning_end_components(mdp, priorities);
    let mut winning = vec![false; n];
    for w in &wecs {
        for &q in &w.states {
            winning[q] = true;
        }
    }
    let reach = max_reachability(mdp, &winning)?;
    let mut rows = reach.rows.clone();
    for w in &wecs {
        let pmin = w.states.iter().map(|&q| priorities[q]).min().unwrap();
        // Backward BFS distance to the minimum-priority states, along rows
        // that stay inside the component.
        let mut dist: BTreeMap<StateId, usize> = w
            .states
            .iter()
            .filter(|&&q| priorities[q] == pmin)
            .map(|&q| (q, 0))
            .collect();
        let mut frontier: VecDeque<StateId> = dist.keys().copied().collect();
        while let Some(t) = frontier.pop_front() {
            for &q in &w.states {
                if dist.contains_key(&q) {
                    continue;
                }
                let steps_down = w
                    .rows_of(q)
                    .iter()
                    .any(|&r| mdp.rows(q)[r].dist.iter().any(|&(_, s, _)| s == t));
                if steps_down {
                    dist.insert(q, dist[&t] + 1);
                    frontier.push_back(q);
                }
            }
        }
        debug_assert_eq!(dist.len(), w.states.len(), "component is strongly connected");
        for &q in &w.states {
            let d = dist[&q];
            if d == 0 {
                rows[q] = *w.rows_of(q).iter().next().unwrap();
            } else {
                // Any staying row with a successor strictly closer to the
                // minimum-priority states.
                let chosen = w.rows_of(q).iter().copied().find(|&r| {
                    mdp.rows(q)[r]
                        .dist
                        .iter()
                        .any(|&(_, t, _)| dist.get(&t).is_some_and(|&dt| dt < d))
                });
                rows[q] = chosen.expect("BFS distance admits a decreasing row");
            }
        }
    }
    let scheduler = Scheduler::memoryless(
        (0..n).map(|q| (q, mdp.rows(q)[rows[q]].action)).collect(),
    );
    // Independent certificate: the induced chain of the extracted scheduler
    // must achieve exactly the claimed value.
    let chain = scheduler.induced_chain(mdp)?;
    let chain_prios: Vec<u32> =
        chain.states().iter().map(|&(_, q)| priorities[q]).collect();
    let certified = chain.omega_probability(&chain_prios)?;
    let value = reach.values[mdp.initial()].clone();
    if certified != value {
        return Err(Error::InvalidInput(format!(
            "internal: certificate mismatch, solver reports {} but the scheduler achieves {}",
            crate::format_ratio(&value),
            crate::format_ratio(&certified)
        )));
    }
    Ok(ParityOutcome {
        values: reach.values,
        value,
        rows,
        winning_states: winning,
        scheduler,
    })
}

/// Sound lower and upper bounds on the maximal parity probability from the
/// iterative engine.
#[derive(Debug, Clone, Copy)]
pub struct IntervalBounds {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl IntervalBounds {
    pub fn midpoint(&self) -> f64 {
        (self.lower + self.upper) / 2.0
    }
}

const INTERVAL_MAX_ITERATIONS: usize = 2_000_000;

/// Interval iteration for the same objective: the qualitative analysis
/// (winning end components) stays exact, the reachability part runs
/// floating-point value iteration from below and, on the end-component
/// quotient, from above.  Both bounds are sound; the loop stops when they
/// are `eps`-close or the iteration budget runs out.
pub fn max_parity_interval(
    mdp: &LabeledMdp,
    priorities: &[u32],
    eps: f64,
) -> Result<IntervalBounds> {
    let n = mdp.state_count();
    let wecs = winning_end_components(mdp, priorities);
    let mut winning = vec![false; n];
    for w in &wecs {
        for &q in &w.states {
            winning[q] = true;
        }
    }
    // Quotient by maximal end components so the upper iteration cannot get
    // stuck on a spurious fixpoint inside a component.
    let mecs = mec_decomposition(mdp);
    let mut node_of: Vec<usize> = vec![usize::MAX; n];
    let mut nodes = 0usize;
    for mec in &mecs {
        for &q in &mec.states {
            node_of[q] = nodes;
        }
        nodes += 1;
    }
    for q in 0..n {
        if node_of[q] == usize::MAX {
            node_of[q] = nodes;
            nodes += 1;
        }
    }
    let mut target = vec![false; nodes];
    for q in 0..n {
        if winning[q] {
            target[node_of[q]] = true;
        }
    }
    // Quotient actions: per node, the member rows that put probability
    // outside the node.  Target nodes absorb.
    let mut actions: Vec<Vec<Vec<(usize, f64)>>> = vec![Vec::new(); nodes];
    for q in 0..n {
        let u = node_of[q];
        if target[u] {
            continue;
        }
        for row in mdp.rows(q) {
            let mut mass: BTreeMap<usize, f64> = BTreeMap::new();
            for &(_, t, ref p) in &row.dist {
                *mass.entry(node_of[t]).or_insert(0.0) +=
                    p.to_f64().expect("probability fits in f64");
            }
            if mass.keys().any(|&v| v != u) {
                actions[u].push(mass.into_iter().collect());
            }
        }
    }
    // States with no path to the target in the quotient graph have value 0.
    let mut can = target.clone();
    loop {
        let mut changed = false;
        for u in 0..nodes {
            if can[u] {
                continue;
            }
            if actions[u]
                .iter()
                .any(|a| a.iter().any(|&(v, p)| p > 0.0 && can[v]))
            {
                can[u] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut lo = vec![0.0f64; nodes];
    let mut hi = vec![0.0f64; nodes];
    for u in 0..nodes {
        if target[u] {
            lo[u] = 1.0;
            hi[u] = 1.0;
        } else if can[u] {
            hi[u] = 1.0;
        }
    }
    let bellman = |x: &[f64], u: usize| -> f64 {
        actions[u]
            .iter()
            .map(|a| a.iter().map(|&(v, p)| p * x[v]).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < INTERVAL_MAX_ITERATIONS {
        iterations += 1;
        let mut gap: f64 = 0.0;
        for u in 0..nodes {
            if target[u] || !can[u] {
                continue;
            }
            let new_lo = bellman(&lo, u).max(lo[u]);
            let new_hi = bellman(&hi, u).min(hi[u]);
            lo[u] = new_lo;
            hi[u] = new_hi;
            gap = gap.max(hi[u] - lo[u]);
        }
        if gap < eps {
            converged = true;
            break;
        }
    }
    let u0 = node_of[mdp.initial()];
    Ok(IntervalBounds {
        lower: lo[u0],
        upper: hi[u0],
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{choice, fig1_mdp, half};
    use crate::parse_ratio;

    fn r(s: &str) -> BigRational {
        parse_ratio(s).unwrap()
    }

    #[test]
    fn fig1_is_a_single_mec() {
        let mdp = fig1_mdp();
        let mecs = mec_decomposition(&mdp);
        assert_eq!(mecs.len(), 1);
        assert_eq!(mecs[0].states.len(), 4);
        for rows in &mecs[0].rows {
            assert!(!rows.is_empty());
        }
    }

    #[test]
    fn coin_flip_has_two_absorbing_mecs() {
        let mdp = half();
        let mecs = mec_decomposition(&mdp);
        assert_eq!(mecs.len(), 2);
        let names: Vec<&str> = mecs
            .iter()
            .map(|m| {
                assert_eq!(m.states.len(), 1);
                mdp.state_name(m.states[0])
            })
            .collect();
        assert_eq!(names, vec!["s1", "s2"]);
    }

    #[test]
    fn winning_components_respect_parity() {
        let mdp = fig1_mdp();
        // Priority 0 at q1, 1 elsewhere: the only winning component must
        // avoid... it cannot avoid q0/q0p (leaving q1 requires them), so the
        // winning component is the whole MEC with minimum priority 0.
        let q1 = mdp.state_id("q1").unwrap();
        let prios: Vec<u32> = (0..mdp.state_count()).map(|q| u32::from(q != q1)).collect();
        let wecs = winning_end_components(&mdp, &prios);
        assert_eq!(wecs.len(), 1);
        assert_eq!(wecs[0].states.len(), 4);
        // All odd: nothing wins.
        let wecs = winning_end_components(&mdp, &vec![1; 4]);
        assert!(wecs.is_empty());
    }

    #[test]
    fn winning_components_can_shrink_away_from_odd_states() {
        // s0 can loop on itself (priority 2) or drift to s1 (priority 1)
        // and back; the sub-component {s0} alone wins by avoiding s1.
        let mdp = LabeledMdp::new(
            vec!["s0".into(), "s1".into()],
            vec!["l".into()],
            vec!["stay".into(), "drift".into()],
            "s0",
            vec![
                ("s0".into(), "stay".into(), vec![("l".into(), "s0".into(), r("1"))]),
                ("s0".into(), "drift".into(), vec![("l".into(), "s1".into(), r("1"))]),
                ("s1".into(), "stay".into(), vec![("l".into(), "s0".into(), r("1"))]),
            ],
        )
        .unwrap();
        let wecs = winning_end_components(&mdp, &[2, 1]);
        assert_eq!(wecs.len(), 1);
        assert_eq!(wecs[0].states, vec![0]);
        assert_eq!(wecs[0].rows[0].len(), 1, "only the self-loop row stays");
    }

    #[test]
    fn reachability_on_coin_flip() {
        let mdp = half();
        let s1 = mdp.state_id("s1").unwrap();
        let mut target = vec![false; mdp.state_count()];
        target[s1] = true;
        let reach = max_reachability(&mdp, &target).unwrap();
        assert_eq!(reach.values[mdp.initial()], r("1/2"));
    }

    #[test]
    fn reachability_prefers_the_better_action() {
        let mdp = choice();
        let s1 = mdp.state_id("s1").unwrap();
        let mut target = vec![false; mdp.state_count()];
        target[s1] = true;
        let reach = max_reachability(&mdp, &target).unwrap();
        assert_eq!(reach.values[mdp.initial()], r("1"));
        let chosen = mdp.rows(mdp.initial())[reach.rows[mdp.initial()]].action;
        assert_eq!(mdp.action_name(chosen), "pick");
    }

    #[test]
    fn parity_value_on_coin_flip_is_exact() {
        let mdp = half();
        // Win iff absorbed at s1.
        let prios: Vec<u32> = (0..mdp.state_count())
            .map(|q| if mdp.state_name(q) == "s1" { 0 } else { 1 })
            .collect();
        let outcome = max_parity(&mdp, &prios).unwrap();
        assert_eq!(outcome.value, r("1/2"));
    }

    #[test]
    fn parity_certificate_spans_the_mixed_policy() {
        // Reaching the winning component requires one action, staying
        // another; the certificate checks the combined scheduler.
        let mdp = fig1_mdp();
        let q1 = mdp.state_id("q1").unwrap();
        let prios: Vec<u32> = (0..mdp.state_count()).map(|q| u32::from(q != q1)).collect();
        let outcome = max_parity(&mdp, &prios).unwrap();
        assert_eq!(outcome.value, r("1"));
        assert!(outcome.winning_states.iter().all(|&b| b));
    }

    #[test]
    fn interval_engine_brackets_the_exact_value() {
        for (mdp, prios, expect) in [
            (half(), vec![1, 0, 1], r("1/2")),
            (choice(), vec![1, 0, 1], r("1")),
        ] {
            let exact = max_parity(&mdp, &prios).unwrap().value;
            assert_eq!(exact, expect);
            let bounds = max_parity_interval(&mdp, &prios, 1e-10).unwrap();
            assert!(bounds.converged);
            let v = exact.to_f64().unwrap();
            assert!(bounds.lower <= v + 1e-12 && v <= bounds.upper + 1e-12);
            assert!((bounds.midpoint() - v).abs() < 1e-9);
        }
    }

    #[test]
    fn random_models_certify_and_bracket() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            std::env::var("OPAQ_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
                .unwrap_or(0xC0FFEE),
        );
        for _ in 0..40 {
            let n = rng.gen_range(2..=5);
            let mut transitions = Vec::new();
            for q in 0..n {
                let n_rows = rng.gen_range(1..=2);
                for a in 0..n_rows {
                    let support = rng.gen_range(1..=2.min(n));
                    let mut outcomes = Vec::new();
                    let mut targets = BTreeSet::new();
                    while targets.len() < support {
                        targets.insert(rng.gen_range(0..n));
                    }
                    let weights: Vec<u32> =
                        (0..support).map(|_| rng.gen_range(1..=3)).collect();
                    let total: u32 = weights.iter().sum();
                    for (i, t) in targets.iter().enumerate() {
                        outcomes.push((
                            format!("l{}", i % 2),
                            format!("q{t}"),
                            BigRational::new(weights[i].into(), total.into()),
                        ));
                    }
                    transitions.push((format!("q{q}"), format!("act{a}"), outcomes));
                }
            }
            let mdp = LabeledMdp::new(
                (0..n).map(|q| format!("q{q}")).collect(),
                vec!["l0".into(), "l1".into()],
                vec!["act0".into(), "act1".into()],
                "q0",
                transitions,
            )
            .unwrap();
            mdp.require_valid().unwrap();
            let prios: Vec<u32> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let outcome = max_parity(&mdp, &prios).unwrap();
            let bounds = max_parity_interval(&mdp, &prios, 1e-11).unwrap();
            let v = outcome.value.to_f64().unwrap();
            assert!(
                bounds.lower <= v + 1e-12 && v <= bounds.upper + 1e-12,
                "interval [{}, {}] misses exact {v}",
                bounds.lower,
                bounds.upper
            );
            assert!((bounds.midpoint() - v).abs() < 1e-9);
        }
    }
}
