//! Model transforms: state mappings, action mappings, weighting, and the
//! parameterized transform kinds with automatic grounding.
//!
//! Action-side transforms address an action *schema* (group), so a single
//! grounded transform such as `precondition-relaxation(move, fuel>0)` edits the
//! same literal in every member of the group.

mod catalog;
mod mapping;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{ActionDef, FactoredMdp, Literal, LiteralSpec, Outcome};

pub use catalog::{Catalog, TransformSchema};
pub use mapping::{ActionMapping, StateMapping, StateWeighting};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    StateSpaceReduction,
    SingleOutcomeDeterminization,
    AllOutcomeDeterminization,
    PreconditionRelaxation,
    PreconditionAddition,
    DeleteRelaxation,
}

impl TransformKind {
    pub const ALL: [TransformKind; 6] = [
        TransformKind::StateSpaceReduction,
        TransformKind::SingleOutcomeDeterminization,
        TransformKind::AllOutcomeDeterminization,
        TransformKind::PreconditionRelaxation,
        TransformKind::PreconditionAddition,
        TransformKind::DeleteRelaxation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransformKind::StateSpaceReduction => "state-space-reduction",
            TransformKind::SingleOutcomeDeterminization => "single-outcome-determinization",
            TransformKind::AllOutcomeDeterminization => "all-outcome-determinization",
            TransformKind::PreconditionRelaxation => "precondition-relaxation",
            TransformKind::PreconditionAddition => "precondition-addition",
            TransformKind::DeleteRelaxation => "delete-relaxation",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TransformKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        TransformKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown transform kind `{s}`"))
    }
}

/// One atomic model edit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroundedTransform {
    /// Project away every variable of the listed features. An empty list is the identity.
    StateSpaceReduction {
        features: Vec<String>,
    },
    SingleOutcomeDeterminization {
        action: String,
    },
    AllOutcomeDeterminization {
        action: String,
    },
    PreconditionRelaxation {
        action: String,
        literal: String,
        /// Features of the literal's variables.
        features: Vec<String>,
    },
    PreconditionAddition {
        action: String,
        literal: Literal,
        features: Vec<String>,
    },
    /// `features` lists the features of the deleted boolean variables.
    DeleteRelaxation {
        action: String,
        features: Vec<String>,
    },
}

/// Model element a transform edits, used to decide whether two transforms commute.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Touch {
    Literal {
        schema: String,
        label: String,
    },
    Outcomes {
        schema: String,
    },
    /// The action set of a schema itself (renaming, adding actions).
    Actions {
        schema: String,
    },
    /// A feature whose variables a literal or effect reads.
    Reads(String),
    Projects(String),
}

impl Touch {
    fn schema(&self) -> Option<&str> {
        match self {
            Touch::Literal { schema, .. } | Touch::Outcomes { schema } | Touch::Actions { schema } => Some(schema),
            Touch::Reads(_) | Touch::Projects(_) => None,
        }
    }

    pub fn conflicts(&self, other: &Touch) -> bool {
        match (self, other) {
            (Touch::Reads(_), Touch::Reads(_)) => false,
            _ if self == other => true,
            (Touch::Reads(a) | Touch::Projects(a), Touch::Reads(b) | Touch::Projects(b)) => a == b,
            (Touch::Actions { .. }, _) | (_, Touch::Actions { .. }) => {
                self.schema().is_some() && self.schema() == other.schema()
            }
            _ => false,
        }
    }
}

/// A transform applied to a model, with the step mappings it induces.
#[derive(Clone, Debug)]
pub struct Applied {
    pub model: FactoredMdp,
    pub phi: StateMapping,
    pub psi: ActionMapping,
}

impl GroundedTransform {
    pub fn identity() -> Self {
        GroundedTransform::StateSpaceReduction { features: Vec::new() }
    }

    pub fn kind(&self) -> TransformKind {
        match self {
            GroundedTransform::StateSpaceReduction { .. } => TransformKind::StateSpaceReduction,
            GroundedTransform::SingleOutcomeDeterminization { .. } => TransformKind::SingleOutcomeDeterminization,
            GroundedTransform::AllOutcomeDeterminization { .. } => TransformKind::AllOutcomeDeterminization,
            GroundedTransform::PreconditionRelaxation { .. } => TransformKind::PreconditionRelaxation,
            GroundedTransform::PreconditionAddition { .. } => TransformKind::PreconditionAddition,
            GroundedTransform::DeleteRelaxation { .. } => TransformKind::DeleteRelaxation,
        }
    }

    /// Number of single-element model edits; the unit of explanation distance.
    pub fn atomic_changes(&self) -> u32 {
        1
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, GroundedTransform::StateSpaceReduction { features } if features.is_empty())
    }

    /// Bound parameters, in the vocabulary of the model they were grounded on.
    pub fn params(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        match self {
            GroundedTransform::StateSpaceReduction { features } => {
                p.insert("features".into(), features.join(","));
            }
            GroundedTransform::SingleOutcomeDeterminization { action }
            | GroundedTransform::AllOutcomeDeterminization { action }
            | GroundedTransform::DeleteRelaxation { action, .. } => {
                p.insert("action".into(), action.clone());
            }
            GroundedTransform::PreconditionRelaxation { action, literal, .. } => {
                p.insert("action".into(), action.clone());
                p.insert("literal".into(), literal.clone());
            }
            GroundedTransform::PreconditionAddition { action, literal, .. } => {
                p.insert("action".into(), action.clone());
                p.insert("literal".into(), literal.label.clone());
            }
        }
        p
    }

    /// Canonical identity, e.g. `precondition-relaxation(move,fuel>0)`.
    pub fn id(&self) -> String {
        let args = match self {
            GroundedTransform::StateSpaceReduction { features } => features.join("+"),
            GroundedTransform::SingleOutcomeDeterminization { action }
            | GroundedTransform::AllOutcomeDeterminization { action }
            | GroundedTransform::DeleteRelaxation { action, .. } => action.clone(),
            GroundedTransform::PreconditionRelaxation { action, literal, .. } => format!("{action},{literal}"),
            GroundedTransform::PreconditionAddition { action, literal, .. } => format!("{action},{}", literal.label),
        };
        format!("{}({})", self.kind(), args)
    }

    /// Features whose variables the transform projects, or which its literal or
    /// deleted effects read.
    pub fn features(&self) -> &[String] {
        match self {
            GroundedTransform::StateSpaceReduction { features }
            | GroundedTransform::PreconditionRelaxation { features, .. }
            | GroundedTransform::PreconditionAddition { features, .. }
            | GroundedTransform::DeleteRelaxation { features, .. } => features,
            GroundedTransform::SingleOutcomeDeterminization { .. }
            | GroundedTransform::AllOutcomeDeterminization { .. } => &[],
        }
    }

    /// Action schema the transform edits, if any.
    pub fn schema(&self) -> Option<&str> {
        match self {
            GroundedTransform::StateSpaceReduction { .. } => None,
            GroundedTransform::SingleOutcomeDeterminization { action }
            | GroundedTransform::AllOutcomeDeterminization { action }
            | GroundedTransform::PreconditionRelaxation { action, .. }
            | GroundedTransform::PreconditionAddition { action, .. }
            | GroundedTransform::DeleteRelaxation { action, .. } => Some(action),
        }
    }

    pub fn touches(&self) -> Vec<Touch> {
        let vars = |vs: &[String]| vs.iter().cloned().map(Touch::Reads).collect::<Vec<_>>();
        match self {
            GroundedTransform::StateSpaceReduction { features } => {
                features.iter().cloned().map(Touch::Projects).collect()
            }
            GroundedTransform::SingleOutcomeDeterminization { action } => {
                vec![Touch::Outcomes { schema: action.clone() }]
            }
            GroundedTransform::AllOutcomeDeterminization { action } => {
                vec![Touch::Outcomes { schema: action.clone() }, Touch::Actions { schema: action.clone() }]
            }
            GroundedTransform::PreconditionRelaxation { action, literal, features: vs } => {
                let mut t = vec![Touch::Literal { schema: action.clone(), label: literal.clone() }];
                t.extend(vars(vs));
                t
            }
            GroundedTransform::PreconditionAddition { action, literal, features: vs } => {
                let mut t = vec![Touch::Literal { schema: action.clone(), label: literal.label.clone() }];
                t.extend(vars(vs));
                t
            }
            GroundedTransform::DeleteRelaxation { action, features: vs } => {
                let mut t = vec![Touch::Outcomes { schema: action.clone() }];
                t.extend(vars(vs));
                t
            }
        }
    }

    /// Syntactic commutation check: the two transforms edit disjoint model elements.
    pub fn commutes_with(&self, other: &GroundedTransform) -> bool {
        let mine = self.touches();
        let theirs = other.touches();
        !mine.iter().any(|a| theirs.iter().any(|b| a.conflicts(b)))
    }

    fn stale(&self, reason: impl Into<String>) -> Error {
        Error::GroundingStale { transform: self.id(), reason: reason.into() }
    }

    fn group(&self, mdp: &FactoredMdp, schema: &str) -> Result<Vec<usize>> {
        let members: Vec<usize> = (0..mdp.actions.len()).filter(|&i| mdp.actions[i].schema == schema).collect();
        if members.is_empty() {
            return Err(self.stale(format!("no action in schema `{schema}`")));
        }
        Ok(members)
    }

    pub fn apply(&self, mdp: &FactoredMdp) -> Result<FactoredMdp> {
        Ok(self.apply_with_mappings(mdp)?.model)
    }

    pub fn apply_with_mappings(&self, mdp: &FactoredMdp) -> Result<Applied> {
        let mut out = mdp.clone();
        let mut phi = StateMapping::identity();
        let mut psi = ActionMapping::identity();
        match self {
            GroundedTransform::StateSpaceReduction { features } => {
                let mut newly = BTreeSet::new();
                for f in features {
                    let vars = mdp.feature_variables(f);
                    if vars.is_empty() {
                        return Err(self.stale(format!("no feature `{f}`")));
                    }
                    newly.extend(vars.into_iter().filter(|v| !mdp.hidden.contains(v)));
                }
                if !features.is_empty() && newly.is_empty() {
                    return Err(self.stale("features already projected away"));
                }
                out.hidden.extend(newly.iter().copied());
                phi = StateMapping::projection(newly);
            }
            GroundedTransform::SingleOutcomeDeterminization { action } => {
                let members = self.group(mdp, action)?;
                let mut changed = false;
                for i in members {
                    let a = &mut out.actions[i];
                    if !a.is_stochastic() {
                        continue;
                    }
                    let mut best = 0;
                    for (oi, o) in a.outcomes.iter().enumerate() {
                        if o.probability > a.outcomes[best].probability {
                            best = oi;
                        }
                    }
                    let mut kept = a.outcomes[best].clone();
                    kept.probability = 1.0;
                    a.outcomes = vec![kept];
                    changed = true;
                }
                if !changed {
                    return Err(self.stale("schema has no stochastic action"));
                }
            }
            GroundedTransform::AllOutcomeDeterminization { action } => {
                let members = self.group(mdp, action)?;
                let mut actions = Vec::with_capacity(out.actions.len());
                let mut changed = false;
                for (i, a) in mdp.actions.iter().enumerate() {
                    if !members.contains(&i) || !a.is_stochastic() {
                        actions.push(a.clone());
                        continue;
                    }
                    changed = true;
                    let mut family = Vec::new();
                    for (oi, o) in a.outcomes.iter().enumerate() {
                        let name = format!("{}#{}", a.name, oi + 1);
                        if mdp.action_index(&name).is_some() {
                            return Err(Error::InvalidModel(format!("action `{name}` already exists")));
                        }
                        family.push(name.clone());
                        actions.push(ActionDef {
                            name,
                            schema: a.schema.clone(),
                            origin: a.origin.clone(),
                            preconditions: a.preconditions.clone(),
                            outcomes: vec![Outcome { probability: 1.0, ..o.clone() }],
                        });
                    }
                    psi.insert_family(&a.name, family);
                }
                if !changed {
                    return Err(self.stale("schema has no stochastic action"));
                }
                out.actions = actions;
            }
            GroundedTransform::PreconditionRelaxation { action, literal, .. } => {
                let members = self.group(mdp, action)?;
                let mut changed = false;
                for i in members {
                    let pre = &mut out.actions[i].preconditions;
                    let before = pre.len();
                    pre.retain(|l| &l.label != literal);
                    changed |= pre.len() != before;
                }
                if !changed {
                    return Err(self.stale(format!("no precondition `{literal}` in schema `{action}`")));
                }
            }
            GroundedTransform::PreconditionAddition { action, literal, .. } => {
                let members = self.group(mdp, action)?;
                for &i in &members {
                    if out.actions[i].preconditions.iter().any(|l| l.label == literal.label) {
                        return Err(
                            self.stale(format!("`{}` already requires `{}`", out.actions[i].name, literal.label))
                        );
                    }
                }
                for i in members {
                    out.actions[i].preconditions.push(literal.clone());
                }
            }
            GroundedTransform::DeleteRelaxation { action, .. } => {
                // Idempotent: a schema without delete effects is left as is.
                for i in self.group(mdp, action)? {
                    for o in &mut out.actions[i].outcomes {
                        o.effects.retain(|e| !mdp.is_delete_effect(e));
                    }
                }
            }
        }
        Ok(Applied { model: out, phi, psi })
    }
}

impl fmt::Display for GroundedTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Ordered list of grounded transforms, applied left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TransformSequence {
    pub transforms: Vec<GroundedTransform>,
}

impl TransformSequence {
    pub fn new(transforms: Vec<GroundedTransform>) -> Self {
        TransformSequence { transforms }
    }

    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    pub fn then(&self, t: GroundedTransform) -> Self {
        let mut transforms = self.transforms.clone();
        transforms.push(t);
        TransformSequence { transforms }
    }

    /// Sum of the members' atomic-change counts.
    pub fn distance(&self) -> u32 {
        self.transforms.iter().map(GroundedTransform::atomic_changes).sum()
    }

    /// Applies every member in order and composes their mappings.
    pub fn apply(&self, mdp: &FactoredMdp) -> Result<Applied> {
        let mut acc = Applied { model: mdp.clone(), phi: StateMapping::identity(), psi: ActionMapping::identity() };
        for t in &self.transforms {
            let step = t.apply_with_mappings(&acc.model)?;
            acc = Applied { model: step.model, phi: acc.phi.then(&step.phi), psi: acc.psi.then(&step.psi) };
        }
        Ok(acc)
    }

    /// Composite state and action mappings of the sequence on `mdp`.
    pub fn compose(&self, mdp: &FactoredMdp) -> Result<(StateMapping, ActionMapping)> {
        let applied = self.apply(mdp)?;
        Ok((applied.phi, applied.psi))
    }
}

/// Every legal binding of `schema` in `mdp`, in model order. Precondition
/// transforms of one action schema are listed grouped by the features their
/// literal reads, groups in order of first appearance.
pub fn ground(schema: &TransformSchema, mdp: &FactoredMdp) -> Vec<GroundedTransform> {
    let allowed_action = |name: &str| schema.actions.as_ref().is_none_or(|list| list.iter().any(|a| a == name));
    let allowed_literal = |label: &str| schema.literals.as_ref().is_none_or(|list| list.iter().any(|l| l == label));
    let feature_names = |l: &Literal| {
        let mut out: Vec<String> = Vec::new();
        for &v in &l.vars {
            let f = mdp.variables[v].feature_name().to_string();
            if !out.contains(&f) {
                out.push(f);
            }
        }
        out
    };
    fn members<'a>(mdp: &'a FactoredMdp, g: &'a str) -> impl Iterator<Item = &'a ActionDef> {
        mdp.actions.iter().filter(move |a| a.schema == g)
    }

    let mut out = Vec::new();
    match schema.kind {
        TransformKind::StateSpaceReduction => {
            for f in mdp.features() {
                let allowed = schema.features.as_ref().is_none_or(|list| list.iter().any(|x| x == f));
                let visible = mdp.feature_variables(f).iter().any(|v| !mdp.hidden.contains(v));
                if allowed && visible {
                    out.push(GroundedTransform::StateSpaceReduction { features: vec![f.to_string()] });
                }
            }
        }
        TransformKind::SingleOutcomeDeterminization | TransformKind::AllOutcomeDeterminization => {
            for g in mdp.schemas() {
                if allowed_action(g) && members(mdp, g).any(ActionDef::is_stochastic) {
                    out.push(if schema.kind == TransformKind::SingleOutcomeDeterminization {
                        GroundedTransform::SingleOutcomeDeterminization { action: g.to_string() }
                    } else {
                        GroundedTransform::AllOutcomeDeterminization { action: g.to_string() }
                    });
                }
            }
        }
        TransformKind::PreconditionRelaxation => {
            for g in mdp.schemas() {
                if !allowed_action(g) {
                    continue;
                }
                let mut seen: Vec<&str> = Vec::new();
                let mut found = Vec::new();
                for a in members(mdp, g) {
                    for l in &a.preconditions {
                        if !seen.contains(&l.label.as_str()) && allowed_literal(&l.label) {
                            seen.push(&l.label);
                            found.push(GroundedTransform::PreconditionRelaxation {
                                action: g.to_string(),
                                literal: l.label.clone(),
                                features: feature_names(l),
                            });
                        }
                    }
                }
                out.extend(by_feature_group(found));
            }
        }
        TransformKind::PreconditionAddition => {
            let candidates = addition_candidates(schema, mdp);
            for g in mdp.schemas() {
                if !allowed_action(g) {
                    continue;
                }
                let mut found = Vec::new();
                for l in &candidates {
                    if allowed_literal(&l.label)
                        && !members(mdp, g).any(|a| a.preconditions.iter().any(|p| p.label == l.label))
                    {
                        found.push(GroundedTransform::PreconditionAddition {
                            action: g.to_string(),
                            literal: l.clone(),
                            features: feature_names(l),
                        });
                    }
                }
                out.extend(by_feature_group(found));
            }
        }
        TransformKind::DeleteRelaxation => {
            for g in mdp.schemas() {
                if !allowed_action(g) {
                    continue;
                }
                let mut features: Vec<String> = Vec::new();
                for a in members(mdp, g) {
                    for (oi, ei) in mdp.delete_effects(a) {
                        let f = mdp.variables[a.outcomes[oi].effects[ei].var].feature_name();
                        if !features.iter().any(|x| x == f) {
                            features.push(f.to_string());
                        }
                    }
                }
                if !features.is_empty() {
                    out.push(GroundedTransform::DeleteRelaxation { action: g.to_string(), features });
                }
            }
        }
    }
    out
}

/// Stable regrouping by touched features, groups in order of first appearance.
fn by_feature_group(ts: Vec<GroundedTransform>) -> Vec<GroundedTransform> {
    let mut groups: Vec<(Vec<String>, Vec<GroundedTransform>)> = Vec::new();
    for t in ts {
        let key = t.features().to_vec();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(t),
            None => groups.push((key, vec![t])),
        }
    }
    groups.into_iter().flat_map(|(_, g)| g).collect()
}

/// Literals a precondition addition may introduce: the schema's explicit list if
/// given, otherwise every distinct labelled literal of the model.
fn addition_candidates(schema: &TransformSchema, mdp: &FactoredMdp) -> Vec<Literal> {
    if !schema.candidates.is_empty() {
        return schema
            .candidates
            .iter()
            .enumerate()
            .filter_map(|(i, spec): (usize, &LiteralSpec)| {
                mdp.literal_from_spec(spec, &format!("candidates[{i}]")).ok()
            })
            .collect();
    }
    let mut out: Vec<Literal> = Vec::new();
    for a in &mdp.actions {
        for l in &a.preconditions {
            if !out.iter().any(|x| x.label == l.label) {
                out.push(l.clone());
            }
        }
    }
    out
}

/// Grounds every schema of a catalog, in catalog order, dropping repeats.
pub fn ground_catalog(catalog: &[TransformSchema], mdp: &FactoredMdp) -> Vec<GroundedTransform> {
    let mut out: Vec<GroundedTransform> = Vec::new();
    for t in catalog.iter().flat_map(|s| ground(s, mdp)) {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Human-readable rendering of a transform, one sentence template per kind.
pub fn describe(kind: TransformKind, params: &BTreeMap<String, String>) -> String {
    let get = |k: &str| params.get(k).map(String::as_str).unwrap_or("?");
    match kind {
        TransformKind::StateSpaceReduction if get("features").is_empty() => "the model is left unchanged".to_string(),
        TransformKind::StateSpaceReduction => {
            format!("the actor can no longer distinguish states by {}", get("features"))
        }
        TransformKind::SingleOutcomeDeterminization => {
            format!("action {} always has its most likely outcome", get("action"))
        }
        TransformKind::AllOutcomeDeterminization => {
            format!("the actor may choose which outcome of action {} occurs", get("action"))
        }
        TransformKind::PreconditionRelaxation => {
            format!("action {} no longer requires {}", get("action"), get("literal"))
        }
        TransformKind::PreconditionAddition => {
            format!("action {} additionally requires {}", get("action"), get("literal"))
        }
        TransformKind::DeleteRelaxation => {
            format!("action {} no longer sets boolean variables to false", get("action"))
        }
    }
}
