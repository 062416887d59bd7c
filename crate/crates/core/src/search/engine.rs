use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;

use super::{dedup_key, DedupKey, Explanation, RlpeInstance, SearchStats, Strategy, Termination, TraceEntry};
use crate::anticipation::{satisfies, SatisfactionReport};
use crate::error::{Error, Result};
use crate::mdp::{FactoredMdp, TabularMdp};
use crate::solvers::{affected_states, extract_policy, focused_update, solve_on, warm_start, QTable};
use crate::transforms::{
    ground_catalog, ActionMapping, GroundedTransform, StateMapping, TransformKind, TransformSequence,
};

/// A trained and checked node.
struct Evaluated {
    seq: TransformSequence,
    distance: u32,
    model: FactoredMdp,
    phi: StateMapping,
    psi: ActionMapping,
    report: SatisfactionReport,
    /// Kept only by warm-starting strategies.
    q: Option<QTable>,
    steps: u64,
}

struct Pending {
    parent: usize,
    transform: GroundedTransform,
}

struct Search<'a> {
    inst: &'a RlpeInstance,
    strategy: Strategy,
    pool: Option<ThreadPool>,
    start: Instant,
    nodes: Vec<Evaluated>,
    /// Keyed by (distance, insertion order), so equal distances pop FIFO.
    frontier: BTreeMap<(u32, u64), Pending>,
    inserted: u64,
    seen: HashSet<DedupKey>,
    stats: SearchStats,
    trace: Vec<TraceEntry>,
}

pub(super) fn run(inst: &RlpeInstance, strategy: Strategy) -> Result<Explanation> {
    let pool = if inst.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(inst.workers)
                .build()
                .map_err(|e| Error::InvalidModel(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let mut search = Search {
        inst,
        strategy,
        pool,
        start: Instant::now(),
        nodes: Vec::new(),
        frontier: BTreeMap::new(),
        inserted: 0,
        seen: HashSet::new(),
        stats: SearchStats::default(),
        trace: Vec::new(),
    };
    search.seen.insert(dedup_key(&TransformSequence::default()));
    let root = search.evaluate(None, &[])?;
    search.record(&root, false);
    if let Some(found) = search.accept(root)? {
        return Ok(search.finish(found, Termination::Satisfied));
    }
    search.expand(0)?;

    let termination = loop {
        if search.frontier.is_empty() {
            break Termination::Exhausted;
        }
        if search.timed_out() {
            break Termination::Timeout;
        }
        let batch = search.pop_batch();
        let results = search.map(&batch, |(_, p)| search.evaluate(Some(p.parent), std::slice::from_ref(&p.transform)));
        let mut outcome = None;
        for result in results {
            let node = match result {
                Ok(node) => node,
                Err(Error::Capacity { .. }) => {
                    outcome = Some(Termination::Capacity);
                    break;
                }
                Err(e) => return Err(e),
            };
            debug_assert!(node.seq.len() <= search.inst.depth);
            search.record(&node, false);
            if let Some(found) = search.accept(node)? {
                return Ok(search.finish(found, Termination::Satisfied));
            }
            search.expand(search.nodes.len() - 1)?;
        }
        if let Some(t) = outcome {
            break t;
        }
    };
    let best = search.best();
    Ok(search.finish(best, termination))
}

impl Search<'_> {
    fn timed_out(&self) -> bool {
        self.inst.timeout.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        match &self.pool {
            Some(pool) => pool.install(|| items.par_iter().map(f).collect()),
            None => items.iter().map(f).collect(),
        }
    }

    /// Up to `workers` entries sharing the smallest distance, in FIFO order.
    fn pop_batch(&mut self) -> Vec<((u32, u64), Pending)> {
        let mut batch = Vec::new();
        while batch.len() < self.inst.workers {
            let Some(entry) = self.frontier.first_entry() else {
                break;
            };
            if batch.first().is_some_and(|((d, _), _)| *d != entry.key().0) {
                break;
            }
            let key = *entry.key();
            batch.push((key, entry.remove()));
        }
        batch
    }

    /// Applies `step` to the parent node (or takes the original model), trains
    /// the actor and checks satisfaction.
    fn evaluate(&self, parent: Option<usize>, step: &[GroundedTransform]) -> Result<Evaluated> {
        let inst = self.inst;
        let parent = parent.map(|i| &self.nodes[i]);
        let (mut seq, mut model, phi, psi) = match parent {
            Some(p) => (p.seq.clone(), p.model.clone(), p.phi.clone(), p.psi.clone()),
            None => {
                (TransformSequence::default(), inst.model.clone(), StateMapping::identity(), ActionMapping::identity())
            }
        };
        let mut step_phi = StateMapping::identity();
        let mut step_psi = ActionMapping::identity();
        for t in step {
            let applied = t.apply_with_mappings(&model)?;
            model = applied.model;
            step_phi = step_phi.then(&applied.phi);
            step_psi = step_psi.then(&applied.psi);
            seq = seq.then(t.clone());
        }
        let tab = Arc::new(TabularMdp::compile_capped(&model, inst.state_cap)?);
        let q = match parent.and_then(|p| p.q.as_ref().map(|q| (p, q))) {
            Some((p, pq)) if self.strategy.warm_starts() => {
                let affected = affected_states(pq.tabular(), &tab, &step_phi);
                let warm = warm_start(pq, &p.model, &step_phi, &step_psi, Arc::clone(&tab))?;
                focused_update(warm, &affected, &inst.actor)
            }
            _ => solve_on(tab, &inst.actor),
        };
        let phi = phi.then(&step_phi);
        let psi = psi.then(&step_psi);
        let report = satisfies(&extract_policy(&q), &inst.anticipated, &phi, &psi);
        let steps = q.steps();
        Ok(Evaluated {
            distance: inst.metric.distance(&seq),
            seq,
            model,
            phi,
            psi,
            report,
            q: self.strategy.warm_starts().then_some(q),
            steps,
        })
    }

    fn record(&mut self, node: &Evaluated, compound: bool) {
        self.stats.nodes_expanded += 1;
        self.stats.solver_invocations += 1;
        self.stats.solver_steps += node.steps;
        if compound {
            self.stats.compound_probes += 1;
        } else {
            self.stats.max_sequence_length = self.stats.max_sequence_length.max(node.seq.len());
        }
        self.trace.push(TraceEntry {
            sequence: node.seq.transforms.iter().map(GroundedTransform::id).collect(),
            distance: node.distance,
            ratio: node.report.ratio,
            compound,
        });
    }

    /// Stores the node; returns its index when it is an accepted solution.
    /// Under `Precluster` a satisfying node is re-checked with a fresh actor,
    /// and the fresh report replaces the warm one.
    fn accept(&mut self, mut node: Evaluated) -> Result<Option<usize>> {
        if node.report.satisfied && self.strategy == Strategy::Precluster && !node.seq.is_empty() {
            node.report = self.verify(&node)?;
        }
        let satisfied = node.report.satisfied;
        self.nodes.push(node);
        Ok(satisfied.then_some(self.nodes.len() - 1))
    }

    fn verify(&mut self, node: &Evaluated) -> Result<SatisfactionReport> {
        let tab = Arc::new(TabularMdp::compile_capped(&node.model, self.inst.state_cap)?);
        let q = solve_on(tab, &self.inst.actor);
        self.stats.solver_invocations += 1;
        self.stats.solver_steps += q.steps();
        Ok(satisfies(&extract_policy(&q), &self.inst.anticipated, &node.phi, &node.psi))
    }

    /// Queues the children of node `idx`, after compound probes under `Precluster`.
    fn expand(&mut self, idx: usize) -> Result<()> {
        let node = &self.nodes[idx];
        if node.seq.len() >= self.inst.depth {
            return Ok(());
        }
        let children = ground_catalog(&self.inst.catalog, &node.model);
        if self.strategy != Strategy::Precluster {
            for t in children {
                self.push(idx, t);
            }
            return Ok(());
        }
        let families = families(&children);
        let probed: Vec<&Vec<GroundedTransform>> = families.iter().filter(|f| f.len() > 1).collect();
        let probes = self.map(&probed, |members| self.evaluate(Some(idx), members));
        let mut pruned = Vec::new();
        for (members, probe) in probed.iter().zip(probes) {
            let compound = match probe {
                Ok(c) => c,
                Err(Error::Capacity { .. } | Error::GroundingStale { .. }) => continue,
                Err(e) => return Err(e),
            };
            self.record(&compound, true);
            if compound.report.ratio <= self.nodes[idx].report.ratio {
                self.stats.pruned += members.len() as u64;
                pruned.extend(members.iter().cloned());
            }
        }
        for t in children {
            if !pruned.contains(&t) {
                self.push(idx, t);
            }
        }
        Ok(())
    }

    fn push(&mut self, parent: usize, t: GroundedTransform) {
        let node = &self.nodes[parent];
        let key = dedup_key(&node.seq.then(t.clone()));
        if self.seen.insert(key) {
            let distance = node.distance + self.inst.metric.cost(&t);
            self.frontier.insert((distance, self.inserted), Pending { parent, transform: t });
            self.inserted += 1;
        }
    }

    /// Highest-ratio node, earliest on ties.
    fn best(&self) -> usize {
        let mut best = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            if n.report.ratio > self.nodes[best].report.ratio {
                best = i;
            }
        }
        best
    }

    fn finish(mut self, idx: usize, termination: Termination) -> Explanation {
        self.stats.wall_time = self.start.elapsed();
        let node = self.nodes.swap_remove(idx);
        Explanation {
            strategy: self.strategy,
            distance: node.distance,
            sequence: node.seq,
            report: node.report,
            termination,
            heuristic: self.strategy == Strategy::Precluster,
            stats: self.stats,
            trace: self.trace,
        }
    }
}

/// Groups transforms by `(kind, schema, features)`, in order of first appearance.
fn families(children: &[GroundedTransform]) -> Vec<Vec<GroundedTransform>> {
    let mut keys: Vec<(TransformKind, Option<&str>, &[String])> = Vec::new();
    let mut out: Vec<Vec<GroundedTransform>> = Vec::new();
    for t in children {
        let key = (t.kind(), t.schema(), t.features());
        match keys.iter().position(|k| *k == key) {
            Some(i) => out[i].push(t.clone()),
            None => {
                keys.push(key);
                out.push(vec![t.clone()]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relax(literal: &str, feature: &str) -> GroundedTransform {
        GroundedTransform::PreconditionRelaxation {
            action: "move".into(),
            literal: literal.into(),
            features: vec![feature.into()],
        }
    }

    #[test]
    fn families_follow_first_appearance() {
        let ts = vec![
            relax("no-north-edge", "taxi"),
            relax("fuel>0", "fuel"),
            relax("no-wall-east", "taxi"),
            GroundedTransform::DeleteRelaxation { action: "move".into(), features: vec!["fuel".into()] },
        ];
        let f = families(&ts);
        assert_eq!(f.len(), 3);
        assert_eq!(f[0], vec![ts[0].clone(), ts[2].clone()]);
        assert_eq!(f[1], vec![ts[1].clone()]);
    }
}
