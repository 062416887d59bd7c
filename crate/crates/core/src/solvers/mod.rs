//! Tabular actors: a value-iteration oracle and Q-learning/SARSA learners, plus
//! warm-starting from a parent model's table and focused updates.

mod focus;
mod learning;
mod value_iteration;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mdp::{FactoredMdp, State, TabularMdp, TERMINAL};

pub use focus::{affected_states, focused_update, warm_start};
pub use learning::{q_learning, q_learning_on, sarsa, sarsa_on};
pub use value_iteration::{value_iteration, value_iteration_on};

/// Actions whose values differ by less than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[serde(alias = "vi")]
    ValueIteration,
    #[serde(alias = "q")]
    QLearning,
    Sarsa,
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "vi" | "value-iteration" => Ok(SolverKind::ValueIteration),
            "q" | "q-learning" => Ok(SolverKind::QLearning),
            "sarsa" => Ok(SolverKind::Sarsa),
            _ => Err(format!("unknown solver `{s}` (expected vi, q or sarsa)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Overrides the model's discount factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Bellman-residual threshold for value iteration.
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub episodes: usize,
    pub max_steps: usize,
    pub alpha: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of the episode budget over which epsilon decays linearly.
    pub epsilon_decay: f64,
    /// Greedy policy is evaluated every this many episodes.
    pub eval_every: usize,
    /// Training stops once the greedy policy is unchanged this many evaluations in a row.
    pub stable_evals: usize,
    /// Episodes seeded at each frontier state during a focused update.
    pub focus_episodes: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kind: SolverKind::ValueIteration,
            gamma: None,
            tolerance: 1e-8,
            max_sweeps: 100_000,
            episodes: 20_000,
            max_steps: 60,
            alpha: 0.1,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay: 0.8,
            eval_every: 500,
            stable_evals: 3,
            focus_episodes: 20,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn new(kind: SolverKind) -> Self {
        SolverConfig { kind, ..SolverConfig::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_episodes(mut self, episodes: usize) -> Self {
        self.episodes = episodes;
        self
    }

    pub(crate) fn discount(&self, tab: &TabularMdp) -> f64 {
        self.gamma.unwrap_or(tab.discount)
    }
}

/// Action values over the reachable states of one model. Row `s` is aligned with
/// the applicable-action row `tab.rows[s]`.
#[derive(Clone, Debug)]
pub struct QTable {
    tab: Arc<TabularMdp>,
    values: Vec<Vec<f64>>,
    converged: bool,
    steps: u64,
}

impl QTable {
    pub fn zeros(tab: Arc<TabularMdp>) -> Self {
        let values = tab.rows.iter().map(|r| vec![0.0; r.len()]).collect();
        QTable { tab, values, converged: false, steps: 0 }
    }

    pub fn tabular(&self) -> &Arc<TabularMdp> {
        &self.tab
    }

    /// Fingerprint of the model this table was trained on.
    pub fn fingerprint(&self) -> u64 {
        self.tab.fingerprint
    }

    pub fn is_converged(&self) -> bool {
        self.converged
    }

    /// Solver steps spent producing this table: (state, action) backups for
    /// value iteration, sampled transitions for the learners.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s]
    }

    pub fn get(&self, s: usize, action: &str) -> Option<f64> {
        self.tab.rows[s].iter().position(|r| self.tab.action_names[r.action] == action).map(|i| self.values[s][i])
    }

    pub fn q(&self, state: &State, action: &str) -> Option<f64> {
        self.tab.index_of(state).and_then(|s| self.get(s, action))
    }

    /// `max_a Q(s, a)`, 0 for dead ends.
    pub fn state_value(&self, s: usize) -> f64 {
        self.values[s].iter().copied().fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v)))).unwrap_or(0.0)
    }

    pub fn value(&self, state: &State) -> Option<f64> {
        self.tab.index_of(state).map(|s| self.state_value(s))
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<Vec<f64>> {
        &mut self.values
    }

    pub(crate) fn set_run(&mut self, converged: bool, steps: u64) {
        self.converged = converged;
        self.steps = steps;
    }
}

/// Deterministic policy over the reachable non-terminal states of a model.
#[derive(Clone, Debug)]
pub struct GreedyPolicy {
    tab: Arc<TabularMdp>,
    /// Index into the model's action list; `None` for dead ends.
    choice: Vec<Option<usize>>,
}

impl PartialEq for GreedyPolicy {
    fn eq(&self, other: &Self) -> bool {
        self.tab.fingerprint == other.tab.fingerprint && self.choice == other.choice
    }
}

impl GreedyPolicy {
    pub fn action(&self, s: usize) -> Option<&str> {
        self.choice[s].map(|a| self.tab.action_names[a].as_str())
    }

    pub fn action_at(&self, state: &State) -> Option<&str> {
        self.tab.index_of(state).and_then(|s| self.action(s))
    }

    pub fn tabular(&self) -> &Arc<TabularMdp> {
        &self.tab
    }

    /// `(state, action)` for every state where the policy is defined.
    pub fn iter(&self) -> impl Iterator<Item = (&State, &str)> {
        self.tab.states.iter().zip(&self.choice).filter_map(|(s, c)| c.map(|a| (s, self.tab.action_names[a].as_str())))
    }

    pub(crate) fn choices(&self) -> &[Option<usize>] {
        &self.choice
    }
}

/// Greedy choice per state, ties within [`TIE_TOLERANCE`] going to the first
/// action in model order.
pub fn extract_policy(q: &QTable) -> GreedyPolicy {
    let choice = (0..q.tab.len()).map(|s| greedy_index(q, s).map(|i| q.tab.rows[s][i].action)).collect();
    GreedyPolicy { tab: Arc::clone(&q.tab), choice }
}

/// Position within row `s` of the greedy action.
pub(crate) fn greedy_index(q: &QTable, s: usize) -> Option<usize> {
    let row = &q.values[s];
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    row.iter().position(|&v| v >= best - TIE_TOLERANCE)
}

/// Trains an actor of the configured kind from scratch.
pub fn solve(mdp: &FactoredMdp, config: &SolverConfig) -> Result<QTable> {
    let tab = Arc::new(TabularMdp::compile(mdp)?);
    Ok(solve_on(tab, config))
}

pub fn solve_on(tab: Arc<TabularMdp>, config: &SolverConfig) -> QTable {
    match config.kind {
        SolverKind::ValueIteration => value_iteration_on(tab, config),
        SolverKind::QLearning => q_learning_on(QTable::zeros(tab), config),
        SolverKind::Sarsa => sarsa_on(QTable::zeros(tab), config),
    }
}

/// `Σ_b p_b (r_b + γ V(next_b))` for one action row.
pub(crate) fn backup(tab: &TabularMdp, s: usize, a: usize, gamma: f64, v: &[f64]) -> f64 {
    tab.rows[s][a]
        .branches
        .iter()
        .map(|b| {
            let future = if b.next == TERMINAL { 0.0 } else { v[b.next] };
            b.probability * (b.reward + gamma * future)
        })
        .sum()
}

/// Value of following `policy` from every state, by iterative evaluation.
pub fn evaluate_policy(policy: &GreedyPolicy, gamma: f64, tolerance: f64) -> Vec<f64> {
    let tab = &policy.tab;
    let pos: Vec<Option<usize>> =
        (0..tab.len()).map(|s| policy.choice[s].and_then(|a| tab.rows[s].iter().position(|r| r.action == a))).collect();
    let mut v = vec![0.0; tab.len()];
    for _ in 0..1_000_000 {
        let mut delta: f64 = 0.0;
        for s in 0..tab.len() {
            if let Some(a) = pos[s] {
                let new = backup(tab, s, a, gamma, &v);
                delta = delta.max((new - v[s]).abs());
                v[s] = new;
            }
        }
        if delta < tolerance {
            break;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;
    use crate::transforms::GroundedTransform;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn twocell_oracle_values() {
        let m = domains::build_twocell();
        let q = value_iteration(&m, &SolverConfig::default()).unwrap();
        let l = m.state_from(&[("pos", "L")]).unwrap();
        assert!(close(q.q(&l, "go").unwrap(), 0.8 / 0.82, 1e-4));
        assert!(close(q.q(&l, "stay").unwrap(), 0.9 * 0.8 / 0.82, 1e-4));
        assert!(q.is_converged());
        assert_eq!(extract_policy(&q).action_at(&l), Some("go"));
    }

    #[test]
    fn determinized_twocell_value_is_one() {
        let m = domains::build_twocell();
        let det = GroundedTransform::SingleOutcomeDeterminization { action: "go".into() }.apply(&m).unwrap();
        let q = value_iteration(&det, &SolverConfig::default()).unwrap();
        let l = det.state_from(&[("pos", "L")]).unwrap();
        assert!(close(q.q(&l, "go").unwrap(), 1.0, 1e-6));
    }

    #[test]
    fn ties_go_to_first_action() {
        let m = domains::build_twocell();
        let tab = Arc::new(TabularMdp::compile(&m).unwrap());
        let q = QTable::zeros(tab);
        let p = extract_policy(&q);
        assert_eq!(p.action(0), Some("go"));
        assert_eq!(p.action(1), Some("go"));
    }

    #[test]
    fn solver_kind_parses_short_names() {
        assert_eq!("vi".parse::<SolverKind>().unwrap(), SolverKind::ValueIteration);
        assert_eq!("q".parse::<SolverKind>().unwrap(), SolverKind::QLearning);
        assert!("dqn".parse::<SolverKind>().is_err());
    }

    #[test]
    fn config_file_round_trip() {
        let c = SolverConfig::new(SolverKind::Sarsa).with_seed(9);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SolverConfig>(&text).unwrap(), c);
        let short: SolverConfig = serde_json::from_str(r#"{"kind":"q","episodes":10}"#).unwrap();
        assert_eq!(short.kind, SolverKind::QLearning);
        assert_eq!(short.alpha, 0.1);
    }
}
