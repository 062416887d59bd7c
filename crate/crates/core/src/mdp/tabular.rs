use std::collections::{HashMap, VecDeque};

use super::{FactoredMdp, State, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};

/// Successor index used for transitions that end the episode.
pub const TERMINAL: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct Branch<N> {
    pub next: N,
    pub terminal: bool,
    pub probability: f64,
    pub reward: f64,
}

#[derive(Clone, Debug)]
pub struct ActionRow {
    /// Index into the model's action list.
    pub action: usize,
    pub branches: Vec<Branch<usize>>,
    pub expected_reward: f64,
}

/// Explicit reachable-state form of a [`FactoredMdp`], the input of every solver.
#[derive(Clone, Debug)]
pub struct TabularMdp {
    pub states: Vec<State>,
    index: HashMap<State, usize>,
    pub action_names: Vec<String>,
    /// Applicable actions per state, in model order. Empty rows are dead ends.
    pub rows: Vec<Vec<ActionRow>>,
    pub discount: f64,
    pub fingerprint: u64,
}

impl TabularMdp {
    pub fn compile(mdp: &FactoredMdp) -> Result<Self> {
        Self::compile_capped(mdp, DEFAULT_STATE_CAP)
    }

    pub fn compile_capped(mdp: &FactoredMdp, cap: usize) -> Result<Self> {
        let start = mdp.initial_state();
        let mut index: HashMap<State, usize> = HashMap::new();
        let mut states = vec![start.clone()];
        index.insert(start, 0);
        let mut rows: Vec<Vec<ActionRow>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(si) = queue.pop_front() {
            let s = states[si].clone();
            let mut row = Vec::new();
            for ai in mdp.applicable_indices(&s) {
                let mut branches = Vec::new();
                let mut expected = 0.0;
                for b in mdp.branches(&s, ai) {
                    expected += b.probability * b.reward;
                    let next = if b.terminal {
                        TERMINAL
                    } else if let Some(&j) = index.get(&b.next) {
                        j
                    } else {
                        if states.len() >= cap {
                            return Err(Error::Capacity { limit: cap });
                        }
                        let j = states.len();
                        index.insert(b.next.clone(), j);
                        states.push(b.next);
                        queue.push_back(j);
                        j
                    };
                    branches.push(Branch { next, terminal: b.terminal, probability: b.probability, reward: b.reward });
                }
                row.push(ActionRow { action: ai, branches, expected_reward: expected });
            }
            debug_assert_eq!(rows.len(), si);
            rows.push(row);
        }
        Ok(TabularMdp {
            states,
            index,
            action_names: mdp.action_names().map(str::to_string).collect(),
            rows,
            discount: mdp.discount(),
            fingerprint: mdp.fingerprint(),
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: &State) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn is_dead_end(&self, s: usize) -> bool {
        self.rows[s].is_empty()
    }

    /// States with a positive-probability transition into each state.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.states.len()];
        for (s, row) in self.rows.iter().enumerate() {
            for ar in row {
                for b in &ar.branches {
                    if b.next != TERMINAL && !preds[b.next].contains(&s) {
                        preds[b.next].push(s);
                    }
                }
            }
        }
        preds
    }

    pub fn successors(&self, s: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for ar in &self.rows[s] {
            for b in &ar.branches {
                if b.next != TERMINAL && !out.contains(&b.next) {
                    out.push(b.next);
                }
            }
        }
        out
    }
}
