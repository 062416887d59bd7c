//! Explanation reports: a structured JSON schema and a plain-text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mdp::{FactoredMdp, State};
use crate::search::{Explanation, Strategy, Termination};
use crate::transforms::{describe, TransformKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportTransform {
    pub kind: TransformKind,
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportMismatch {
    pub state: BTreeMap<String, String>,
    pub anticipated: String,
    pub actual: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportStats {
    pub nodes_expanded: u64,
    pub compound_probes: u64,
    pub pruned: u64,
    pub solver_invocations: u64,
    pub solver_steps: u64,
    pub max_sequence_length: usize,
    /// Omitted unless requested, so that repeated runs produce identical files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub domain: String,
    pub strategy: Strategy,
    pub satisfied: bool,
    pub heuristic: bool,
    pub termination: Termination,
    pub sequence: Vec<ReportTransform>,
    pub distance: u32,
    pub ratio: f64,
    pub anticipated_states: usize,
    pub mismatches: Vec<ReportMismatch>,
    pub stats: ReportStats,
}

fn named_state(model: &FactoredMdp, s: &State) -> BTreeMap<String, String> {
    model
        .variables()
        .iter()
        .zip(s.values())
        .map(|(v, &x)| (v.name.clone(), v.domain.get(x as usize).cloned().unwrap_or_else(|| "*".into())))
        .collect()
}

impl Report {
    /// `model` is the original model, used to name the mismatched states.
    pub fn new(e: &Explanation, model: &FactoredMdp, wall_time: bool) -> Self {
        Report {
            domain: model.name().to_string(),
            strategy: e.strategy,
            satisfied: e.satisfied(),
            heuristic: e.heuristic,
            termination: e.termination,
            sequence: e
                .sequence
                .transforms
                .iter()
                .map(|t| ReportTransform { kind: t.kind(), params: t.params() })
                .collect(),
            distance: e.distance,
            ratio: e.report.ratio,
            anticipated_states: e.report.total,
            mismatches: e
                .report
                .mismatches
                .iter()
                .map(|m| ReportMismatch {
                    state: named_state(model, &m.state),
                    anticipated: m.anticipated.clone(),
                    actual: m.actual.clone(),
                })
                .collect(),
            stats: ReportStats {
                nodes_expanded: e.stats.nodes_expanded,
                compound_probes: e.stats.compound_probes,
                pruned: e.stats.pruned,
                solver_invocations: e.stats.solver_invocations,
                solver_steps: e.stats.solver_steps,
                max_sequence_length: e.stats.max_sequence_length,
                wall_time_secs: wall_time.then_some(e.stats.wall_time.as_secs_f64()),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} ({} search)", self.domain, self.strategy);
        if self.satisfied && self.sequence.is_empty() {
            out.push_str("actor already matches anticipated policy\n");
        } else {
            if self.satisfied {
                let _ = writeln!(out, "explanation at distance {}:", self.distance);
            } else {
                let _ = writeln!(
                    out,
                    "no explanation found ({}); best sequence reaches satisfaction ratio {:.3}:",
                    termination_text(self.termination),
                    self.ratio
                );
            }
            if self.sequence.is_empty() {
                out.push_str("  (no transforms)\n");
            }
            for (i, t) in self.sequence.iter().enumerate() {
                let _ = writeln!(out, "  {}. {}", i + 1, describe(t.kind, &t.params));
            }
        }
        if self.heuristic {
            out.push_str("clustering was used, so a shorter explanation may exist\n");
        }
        for m in &self.mismatches {
            let state: Vec<String> = m.state.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(
                out,
                "  at [{}] expected {}, actor chose {}",
                state.join(","),
                m.anticipated,
                m.actual.as_deref().unwrap_or("nothing")
            );
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_json())
    }
}

fn termination_text(t: Termination) -> &'static str {
    match t {
        Termination::Satisfied => "satisfied",
        Termination::Exhausted => "search space exhausted",
        Termination::Timeout => "timed out",
        Termination::Capacity => "state cap reached",
    }
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
