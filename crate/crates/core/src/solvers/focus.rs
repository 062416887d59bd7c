use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use super::learning::{Learner, Rule};
use super::value_iteration::fill_from_values;
use super::{backup, extract_policy, QTable, SolverConfig, SolverKind};
use crate::error::{Error, Result};
use crate::mdp::{FactoredMdp, TabularMdp, TERMINAL};
use crate::transforms::{ActionMapping, StateMapping};

/// Initial table for `target` derived from `q` through the mappings `(φ, ψ)`:
/// `Q̄(s̄, ā) = Σ_{s ∈ φ⁻¹(s̄)} w(s) · max_{a ∈ ψ⁻¹(ā)} q(s, a)`.
///
/// Only preimage states present in `q` take part, with the uniform weight
/// renormalized over them; states or actions without a preimage start at 0.
pub fn warm_start(
    q: &QTable,
    source: &FactoredMdp,
    phi: &StateMapping,
    psi: &ActionMapping,
    target: Arc<TabularMdp>,
) -> Result<QTable> {
    if q.fingerprint() != source.fingerprint() {
        return Err(Error::Fingerprint);
    }
    let src = Arc::clone(q.tabular());
    let mut out = QTable::zeros(Arc::clone(&target));
    for (ti, s_bar) in target.states.iter().enumerate() {
        let members: Vec<usize> = if phi.is_identity() {
            src.index_of(s_bar).into_iter().collect()
        } else {
            phi.preimage(s_bar, source).iter().filter_map(|s| src.index_of(s)).collect()
        };
        if members.is_empty() {
            continue;
        }
        let weight = 1.0 / members.len() as f64;
        for (ai, row) in target.rows[ti].iter().enumerate() {
            let name = &target.action_names[row.action];
            let mut total = 0.0;
            for &m in &members {
                let best = src.rows[m]
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| psi.family(&src.action_names[r.action]).contains(name))
                    .map(|(i, _)| q.row(m)[i])
                    .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
                total += weight * best.unwrap_or(0.0);
            }
            out.values_mut()[ti][ai] = total;
        }
    }
    Ok(out)
}

/// Target states whose applicable actions, transition distribution or expected
/// reward differ from the source model (all states when `phi` projects).
pub fn affected_states(source: &TabularMdp, target: &TabularMdp, phi: &StateMapping) -> Vec<usize> {
    if !phi.is_identity() {
        return (0..target.len()).collect();
    }
    (0..target.len())
        .filter(|&t| match source.index_of(&target.states[t]) {
            None => true,
            Some(s) => !same_row(source, s, target, t),
        })
        .collect()
}

fn same_row(a: &TabularMdp, s: usize, b: &TabularMdp, t: usize) -> bool {
    let (ra, rb) = (&a.rows[s], &b.rows[t]);
    ra.len() == rb.len()
        && ra.iter().zip(rb).all(|(x, y)| {
            a.action_names[x.action] == b.action_names[y.action]
                && (x.expected_reward - y.expected_reward).abs() < 1e-12
                && x.branches.len() == y.branches.len()
                && x.branches.iter().zip(&y.branches).all(|(p, q)| {
                    p.terminal == q.terminal
                        && (p.probability - q.probability).abs() < 1e-12
                        && (p.reward - q.reward).abs() < 1e-12
                        && match (p.next, q.next) {
                            (TERMINAL, TERMINAL) => true,
                            (TERMINAL, _) | (_, TERMINAL) => false,
                            (i, j) => a.states[i] == b.states[j],
                        }
                })
        })
}

/// Refines a warm-started table by re-learning around `affected` states only.
///
/// Value iteration backs up the affected states and propagates changes to
/// predecessors until no backup moves a value by more than the tolerance. The
/// learners run episodes seeded at the affected states, then at successive
/// breadth-first layers of neighbours, stopping once a layer's greedy actions
/// no longer change or the episode budget is spent.
pub fn focused_update(q: QTable, affected: &[usize], config: &SolverConfig) -> QTable {
    let steps_before = q.steps();
    if affected.is_empty() {
        let mut q = q;
        q.set_run(true, steps_before);
        return q;
    }
    match config.kind {
        SolverKind::ValueIteration => prioritized_sweep(q, affected, config),
        SolverKind::QLearning => frontier_episodes(q, affected, config, Rule::QLearning),
        SolverKind::Sarsa => frontier_episodes(q, affected, config, Rule::Sarsa),
    }
}

fn prioritized_sweep(mut q: QTable, affected: &[usize], config: &SolverConfig) -> QTable {
    let tab = Arc::clone(q.tabular());
    let gamma = config.discount(&tab);
    let preds = tab.predecessors();
    let mut v: Vec<f64> = (0..tab.len()).map(|s| q.state_value(s)).collect();
    let mut queued = vec![false; tab.len()];
    let mut queue = VecDeque::new();
    for &s in affected {
        if !queued[s] {
            queued[s] = true;
            queue.push_back(s);
        }
    }
    let mut steps = q.steps();
    let budget = (config.max_sweeps as u64).saturating_mul(tab.len() as u64);
    let mut converged = true;
    let mut backups = 0u64;
    while let Some(s) = queue.pop_front() {
        queued[s] = false;
        let row = &tab.rows[s];
        if row.is_empty() {
            continue;
        }
        let best = (0..row.len()).map(|a| backup(&tab, s, a, gamma, &v)).fold(f64::NEG_INFINITY, f64::max);
        steps += row.len() as u64;
        backups += 1;
        let changed = (best - v[s]).abs() >= config.tolerance;
        v[s] = best;
        if changed {
            for &p in &preds[s] {
                if !queued[p] {
                    queued[p] = true;
                    queue.push_back(p);
                }
            }
        }
        if backups >= budget {
            converged = false;
            break;
        }
    }
    fill_from_values(&mut q, &v, gamma);
    q.set_run(converged, steps);
    q
}

fn frontier_episodes(q: QTable, affected: &[usize], config: &SolverConfig, rule: Rule) -> QTable {
    let tab = Arc::clone(q.tabular());
    let preds = tab.predecessors();
    let mut learner = Learner::new(q, config, rule);
    let mut seen: BTreeSet<usize> = affected.iter().copied().collect();
    let mut layer: Vec<usize> = seen.iter().copied().collect();
    let mut episodes = 0usize;
    let mut converged = false;
    while !layer.is_empty() && episodes < config.episodes {
        let before = extract_policy(&learner.q);
        'layer: for &s in &layer {
            for _ in 0..config.focus_episodes {
                if episodes >= config.episodes {
                    break 'layer;
                }
                learner.episode(s, config.epsilon_end);
                episodes += 1;
            }
        }
        let after = extract_policy(&learner.q);
        if layer.iter().all(|&s| before.choices()[s] == after.choices()[s]) {
            converged = true;
            break;
        }
        let mut next = Vec::new();
        for &s in &layer {
            for n in preds[s].iter().copied().chain(tab.successors(s)) {
                if seen.insert(n) {
                    next.push(n);
                }
            }
        }
        layer = next;
    }
    let steps = learner.steps;
    let mut q = learner.q;
    q.set_run(converged || layer.is_empty(), steps);
    q
}
