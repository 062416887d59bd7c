use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{extract_policy, greedy_index, QTable, SolverConfig};
use crate::error::Result;
use crate::mdp::{FactoredMdp, TabularMdp, TERMINAL};

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rule {
    QLearning,
    Sarsa,
}

pub fn q_learning(mdp: &FactoredMdp, config: &SolverConfig) -> Result<QTable> {
    let tab = Arc::new(TabularMdp::compile(mdp)?);
    Ok(q_learning_on(QTable::zeros(tab), config))
}

pub fn sarsa(mdp: &FactoredMdp, config: &SolverConfig) -> Result<QTable> {
    let tab = Arc::new(TabularMdp::compile(mdp)?);
    Ok(sarsa_on(QTable::zeros(tab), config))
}

/// Off-policy TD control from the given initial table.
pub fn q_learning_on(q: QTable, config: &SolverConfig) -> QTable {
    train(q, config, Rule::QLearning)
}

/// On-policy TD control from the given initial table.
pub fn sarsa_on(q: QTable, config: &SolverConfig) -> QTable {
    train(q, config, Rule::Sarsa)
}

pub(crate) struct Learner<'a> {
    pub q: QTable,
    pub tab: Arc<TabularMdp>,
    pub rng: ChaCha8Rng,
    pub config: &'a SolverConfig,
    pub rule: Rule,
    pub gamma: f64,
    pub steps: u64,
}

impl<'a> Learner<'a> {
    pub fn new(q: QTable, config: &'a SolverConfig, rule: Rule) -> Self {
        let tab = Arc::clone(q.tabular());
        let gamma = config.discount(&tab);
        let steps = q.steps();
        Learner { q, tab, rng: ChaCha8Rng::seed_from_u64(config.seed), config, rule, gamma, steps }
    }

    fn choose(&mut self, s: usize, epsilon: f64) -> usize {
        let n = self.tab.rows[s].len();
        if self.rng.gen::<f64>() < epsilon {
            self.rng.gen_range(0..n)
        } else {
            greedy_index(&self.q, s).unwrap_or(0)
        }
    }

    fn sample(&mut self, s: usize, a: usize) -> (usize, f64) {
        let branches = &self.tab.rows[s][a].branches;
        let mut u: f64 = self.rng.gen();
        for b in branches {
            if u < b.probability {
                return (b.next, b.reward);
            }
            u -= b.probability;
        }
        let last = branches.last().expect("actions have outcomes");
        (last.next, last.reward)
    }

    /// One episode from `start`, at most `max_steps` transitions.
    pub fn episode(&mut self, start: usize, epsilon: f64) {
        let alpha = self.config.alpha;
        let mut s = start;
        if self.tab.rows[s].is_empty() {
            return;
        }
        let mut a = self.choose(s, epsilon);
        for _ in 0..self.config.max_steps {
            let (next, reward) = self.sample(s, a);
            self.steps += 1;
            let live = next != TERMINAL && !self.tab.rows[next].is_empty();
            let next_action = if live { Some(self.choose(next, epsilon)) } else { None };
            let future = match (live, self.rule) {
                (false, _) => 0.0,
                (true, Rule::QLearning) => self.q.state_value(next),
                (true, Rule::Sarsa) => self.q.row(next)[next_action.expect("live state")],
            };
            let target = reward + self.gamma * future;
            let cell = &mut self.q.values_mut()[s][a];
            *cell += alpha * (target - *cell);
            match next_action {
                Some(na) => {
                    s = next;
                    a = na;
                }
                None => break,
            }
        }
    }
}

pub(crate) fn epsilon_at(config: &SolverConfig, episode: usize) -> f64 {
    let horizon = (config.episodes as f64 * config.epsilon_decay).max(1.0);
    let t = (episode as f64 / horizon).min(1.0);
    config.epsilon_start + (config.epsilon_end - config.epsilon_start) * t
}

fn train(q: QTable, config: &SolverConfig, rule: Rule) -> QTable {
    let mut learner = Learner::new(q, config, rule);
    let mut previous = extract_policy(&learner.q);
    let mut stable = 0;
    let mut converged = false;
    for ep in 0..config.episodes {
        learner.episode(0, epsilon_at(config, ep));
        if config.eval_every > 0 && (ep + 1) % config.eval_every == 0 {
            let current = extract_policy(&learner.q);
            if current == previous {
                stable += 1;
            } else {
                stable = 0;
            }
            previous = current;
            if stable >= config.stable_evals {
                converged = true;
                break;
            }
        }
    }
    let steps = learner.steps;
    let mut q = learner.q;
    q.set_run(converged, steps);
    q
}
