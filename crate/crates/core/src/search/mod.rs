//! Uniform-cost search over transform sequences for the RLPE problem.
//!
//! Three strategies share one frontier discipline. `Base` retrains every node's
//! actor from scratch. `Pretrain` warm-starts each child from its parent's table
//! and refines it around the states the transform changed. `Precluster` adds
//! family probes on top of `Pretrain`: before a node's children are queued, all
//! members of a transform family are applied at once, and the family is dropped
//! at that node when the compound does not raise the satisfaction ratio.

mod engine;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::anticipation::{PartialPolicy, SatisfactionReport};
use crate::domains::Fixture;
use crate::error::{Error, Result};
use crate::mdp::{FactoredMdp, DEFAULT_STATE_CAP};
use crate::solvers::SolverConfig;
use crate::transforms::{GroundedTransform, TransformSchema, TransformSequence};

pub const DEFAULT_DEPTH: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Base,
    Pretrain,
    Precluster,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Base, Strategy::Pretrain, Strategy::Precluster];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Base => "base",
            Strategy::Pretrain => "pretrain",
            Strategy::Precluster => "precluster",
        }
    }

    fn warm_starts(self) -> bool {
        self != Strategy::Base
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown strategy `{s}` (expected base, pretrain or precluster)"))
    }
}

/// Distance metric over transform sequences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Number of atomic model edits.
    #[default]
    AtomicChanges,
}

impl Metric {
    pub fn cost(self, t: &GroundedTransform) -> u32 {
        match self {
            Metric::AtomicChanges => t.atomic_changes(),
        }
    }

    pub fn distance(self, seq: &TransformSequence) -> u32 {
        seq.transforms.iter().map(|t| self.cost(t)).sum()
    }
}

/// `⟨M, λ, π̃, 𝒯⟩` with a distance metric and search limits.
#[derive(Clone, Debug)]
pub struct RlpeInstance {
    pub model: FactoredMdp,
    pub actor: SolverConfig,
    pub anticipated: PartialPolicy,
    pub catalog: Vec<TransformSchema>,
    /// Longest sequence the search will evaluate.
    pub depth: usize,
    pub metric: Metric,
    /// Checked between node evaluations; the root is always evaluated.
    pub timeout: Option<Duration>,
    /// Reachable-state cap for every model the search compiles.
    pub state_cap: usize,
    /// Node evaluations run in batches of this size on a thread pool when above 1.
    pub workers: usize,
}

impl RlpeInstance {
    pub fn new(model: FactoredMdp, anticipated: PartialPolicy, catalog: Vec<TransformSchema>) -> Self {
        RlpeInstance {
            model,
            actor: SolverConfig::default(),
            anticipated,
            catalog,
            depth: DEFAULT_DEPTH,
            metric: Metric::default(),
            timeout: None,
            state_cap: DEFAULT_STATE_CAP,
            workers: 1,
        }
    }

    pub fn from_fixture(f: Fixture) -> Self {
        RlpeInstance::new(f.model, f.anticipated, f.catalog.schemas)
    }

    pub fn with_actor(mut self, actor: SolverConfig) -> Self {
        self.actor = actor;
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = Some(timeout);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::field("depth", "must be at least 1"));
        }
        self.anticipated.validate(&self.model)
    }

    pub fn solve(&self, strategy: Strategy) -> Result<Explanation> {
        self.validate()?;
        engine::run(self, strategy)
    }
}

pub fn base_search(instance: &RlpeInstance) -> Result<Explanation> {
    instance.solve(Strategy::Base)
}

pub fn pretrain_search(instance: &RlpeInstance) -> Result<Explanation> {
    instance.solve(Strategy::Pretrain)
}

pub fn precluster_search(instance: &RlpeInstance) -> Result<Explanation> {
    instance.solve(Strategy::Precluster)
}

/// Why the search stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Satisfied,
    /// Every sequence within the depth limit was evaluated.
    Exhausted,
    Timeout,
    /// A model exceeded the reachable-state cap.
    Capacity,
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    /// Actor trainings on search nodes, compound probes included.
    pub nodes_expanded: u64,
    pub compound_probes: u64,
    /// Individual transforms dropped by compound probes.
    pub pruned: u64,
    /// Training runs, including from-scratch re-verification.
    pub solver_invocations: u64,
    /// Backups for value iteration, environment steps for the learners.
    pub solver_steps: u64,
    /// Longest sequence evaluated as a search node.
    pub max_sequence_length: usize,
    pub wall_time: Duration,
}

/// Equality ignores wall time.
impl PartialEq for SearchStats {
    fn eq(&self, other: &Self) -> bool {
        self.nodes_expanded == other.nodes_expanded
            && self.compound_probes == other.compound_probes
            && self.pruned == other.pruned
            && self.solver_invocations == other.solver_invocations
            && self.solver_steps == other.solver_steps
            && self.max_sequence_length == other.max_sequence_length
    }
}

/// One evaluation, in order.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub sequence: Vec<String>,
    pub distance: u32,
    pub ratio: f64,
    pub compound: bool,
}

/// Search result: the satisfying sequence, or the best-ratio node on failure.
#[derive(Clone, Debug, PartialEq)]
pub struct Explanation {
    pub strategy: Strategy,
    pub sequence: TransformSequence,
    pub distance: u32,
    pub report: SatisfactionReport,
    pub termination: Termination,
    /// Set when pruning may have cost optimality.
    pub heuristic: bool,
    pub stats: SearchStats,
    pub trace: Vec<TraceEntry>,
}

impl Explanation {
    pub fn satisfied(&self) -> bool {
        self.report.satisfied
    }
}

/// Closed-list key of a sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DedupKey {
    /// Members pairwise commute, so order is irrelevant.
    Set(BTreeSet<String>),
    Ordered(Vec<String>),
}

/// Repeated transforms collapse to their first occurrence; the remainder is
/// keyed as a set when its members pairwise commute and as a list otherwise.
pub fn dedup_key(seq: &TransformSequence) -> DedupKey {
    let mut members: Vec<&GroundedTransform> = Vec::new();
    for t in &seq.transforms {
        if !members.contains(&t) {
            members.push(t);
        }
    }
    let commute = members.iter().enumerate().all(|(i, a)| members[i + 1..].iter().all(|b| a.commutes_with(b)));
    let ids = members.iter().map(|t| t.id());
    if commute {
        DedupKey::Set(ids.collect())
    } else {
        DedupKey::Ordered(ids.collect())
    }
}

#[cfg(test)]
mod tests;
