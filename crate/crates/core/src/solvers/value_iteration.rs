use std::sync::Arc;

use super::{backup, QTable, SolverConfig};
use crate::error::Result;
use crate::mdp::{FactoredMdp, TabularMdp};

pub fn value_iteration(mdp: &FactoredMdp, config: &SolverConfig) -> Result<QTable> {
    let tab = Arc::new(TabularMdp::compile(mdp)?);
    Ok(value_iteration_on(tab, config))
}

/// In-place (Gauss-Seidel) value iteration until the largest Bellman residual
/// drops below `config.tolerance`.
pub fn value_iteration_on(tab: Arc<TabularMdp>, config: &SolverConfig) -> QTable {
    let q = QTable::zeros(tab);
    sweep_from(q, config)
}

/// Runs sweeps starting from the state values implied by `q`.
pub(crate) fn sweep_from(mut q: QTable, config: &SolverConfig) -> QTable {
    let tab = Arc::clone(q.tabular());
    let gamma = config.discount(&tab);
    let mut v: Vec<f64> = (0..tab.len()).map(|s| q.state_value(s)).collect();
    let mut steps = q.steps();
    let mut converged = false;
    for _ in 0..config.max_sweeps {
        let mut delta: f64 = 0.0;
        for s in 0..tab.len() {
            let row = &tab.rows[s];
            if row.is_empty() {
                continue;
            }
            let best = (0..row.len()).map(|a| backup(&tab, s, a, gamma, &v)).fold(f64::NEG_INFINITY, f64::max);
            steps += row.len() as u64;
            delta = delta.max((best - v[s]).abs());
            v[s] = best;
        }
        if delta < config.tolerance {
            converged = true;
            break;
        }
    }
    fill_from_values(&mut q, &v, gamma);
    q.set_run(converged, steps);
    q
}

pub(crate) fn fill_from_values(q: &mut QTable, v: &[f64], gamma: f64) {
    let tab = Arc::clone(q.tabular());
    for (s, row) in q.values_mut().iter_mut().enumerate() {
        for (a, value) in row.iter_mut().enumerate() {
            *value = backup(&tab, s, a, gamma, v);
        }
    }
}
