//! The observer's anticipated partial policy and the satisfaction check.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{FactoredMdp, State, HIDDEN};
use crate::solvers::GreedyPolicy;
use crate::transforms::{ActionMapping, StateMapping, TransformSequence};

/// Anticipated state → action map over states of the original model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialPolicy {
    entries: Vec<(State, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    entries: Vec<EntrySpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntrySpec {
    state: BTreeMap<String, String>,
    action: String,
}

impl PartialPolicy {
    pub fn new() -> Self {
        PartialPolicy::default()
    }

    /// Adds or replaces the anticipated action for `state`.
    pub fn insert(&mut self, state: State, action: impl Into<String>) {
        let action = action.into();
        match self.entries.iter_mut().find(|(s, _)| *s == state) {
            Some(e) => e.1 = action,
            None => self.entries.push((state, action)),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, state: &State) -> Option<&str> {
        self.entries.iter().find(|(s, _)| s == state).map(|(_, a)| a.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&State, &str)> {
        self.entries.iter().map(|(s, a)| (s, a.as_str()))
    }

    /// Every entry names a total state of `mdp` and one of its actions.
    pub fn validate(&self, mdp: &FactoredMdp) -> Result<()> {
        for (i, (s, a)) in self.entries.iter().enumerate() {
            if s.values().contains(&HIDDEN) {
                return Err(Error::field(format!("entries[{i}].state"), "state must assign every variable"));
            }
            mdp.check_state(&mdp.project(s)).map_err(|e| Error::field(format!("entries[{i}].state"), e.to_string()))?;
            if s.len() != mdp.variables().len() {
                return Err(Error::field(format!("entries[{i}].state"), "wrong number of variables"));
            }
            if mdp.action_index(a).is_none() {
                return Err(Error::field(format!("entries[{i}].action"), format!("unknown action `{a}`")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str, mdp: &FactoredMdp) -> Result<Self> {
        let file: PolicyFile = serde_json::from_str(text)?;
        let mut out = PartialPolicy::new();
        for (i, e) in file.entries.iter().enumerate() {
            let field = format!("entries[{i}]");
            for name in e.state.keys() {
                if mdp.variable_index(name).is_none() {
                    return Err(Error::field(format!("{field}.state.{name}"), format!("unknown variable `{name}`")));
                }
            }
            let mut values = Vec::with_capacity(mdp.variables().len());
            for var in mdp.variables() {
                let value = e.state.get(&var.name).ok_or_else(|| {
                    Error::field(format!("{field}.state"), format!("missing variable `{}`", var.name))
                })?;
                values.push(var.index_of(value).ok_or_else(|| {
                    Error::field(
                        format!("{field}.state.{}", var.name),
                        format!("`{value}` is not in the domain of `{}`", var.name),
                    )
                })?);
            }
            if mdp.action_index(&e.action).is_none() {
                return Err(Error::field(format!("{field}.action"), format!("unknown action `{}`", e.action)));
            }
            out.insert(State::new(values), e.action.clone());
        }
        Ok(out)
    }

    pub fn to_json(&self, mdp: &FactoredMdp) -> String {
        let entries = self
            .entries
            .iter()
            .map(|(s, a)| EntrySpec {
                state: mdp
                    .variables()
                    .iter()
                    .zip(s.values())
                    .map(|(v, &x)| (v.name.clone(), v.domain[x as usize].clone()))
                    .collect(),
                action: a.clone(),
            })
            .collect();
        serde_json::to_string_pretty(&PolicyFile { entries }).expect("policy serializes")
    }

    pub fn load(path: impl AsRef<Path>, mdp: &FactoredMdp) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?, mdp)
    }

    pub fn save(&self, path: impl AsRef<Path>, mdp: &FactoredMdp) -> Result<()> {
        std::fs::write(path, self.to_json(mdp))?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    /// Anticipated state, in the original model.
    pub state: State,
    pub anticipated: String,
    /// The actor's choice at `φ(state)`; `None` when the policy is undefined there.
    pub actual: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SatisfactionReport {
    pub satisfied: bool,
    pub ratio: f64,
    /// `|𝕊(π̃)|`.
    pub total: usize,
    pub mismatches: Vec<Mismatch>,
}

/// Satisfaction check: for every anticipated state `s`, `φ(s)` must be in the actor's
/// policy domain and the actor's action there must be in the ψ-family of the
/// anticipated action.
pub fn satisfies(
    actual: &GreedyPolicy,
    anticipated: &PartialPolicy,
    phi: &StateMapping,
    psi: &ActionMapping,
) -> SatisfactionReport {
    let mut mismatches = Vec::new();
    for (s, a) in anticipated.entries() {
        let chosen = actual.action_at(&phi.map(s));
        let ok = chosen.is_some_and(|b| psi.family(a).contains(b));
        if !ok {
            mismatches.push(Mismatch {
                state: s.clone(),
                anticipated: a.to_string(),
                actual: chosen.map(str::to_string),
            });
        }
    }
    let total = anticipated.len();
    let ratio = if total == 0 { 1.0 } else { (total - mismatches.len()) as f64 / total as f64 };
    SatisfactionReport { satisfied: mismatches.is_empty(), ratio, total, mismatches }
}

/// Explanation distance: total atomic changes of the sequence.
pub fn distance(seq: &TransformSequence) -> u32 {
    seq.distance()
}
