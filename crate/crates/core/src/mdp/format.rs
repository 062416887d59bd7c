//! JSON domain-definition files.
//!
//! ```json
//! {
//!   "name": "twocell",
//!   "discount": 0.9,
//!   "variables": [{ "name": "pos", "domain": ["L", "R"] }],
//!   "initial": { "pos": "L" },
//!   "actions": [
//!     { "name": "go",
//!       "outcomes": [
//!         { "p": 0.8, "effects": [{ "set": { "pos": "R" } }] },
//!         { "p": 0.2 } ] },
//!     { "name": "stay", "outcomes": [{ "p": 1.0 }] }
//!   ],
//!   "rewards": [{ "action": "go", "from": { "pos": "L" }, "to": { "pos": "R" }, "value": 1.0 }]
//! }
//! ```
//!
//! Preconditions are labelled literals, `{"label": "fuel>0", "var": "fuel1", "in": ["true"]}`,
//! or over several variables, `{"label": "no-collision", "vars": ["a", "b"], "in": [["x", "y"], ...]}`.
//! Effects may carry a `when` condition evaluated in the source state; `terminal`
//! is either a boolean or a condition on the source state.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::*;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueSet {
    One(String),
    Many(Vec<String>),
}

impl ValueSet {
    fn values(&self) -> Vec<&str> {
        match self {
            ValueSet::One(v) => vec![v.as_str()],
            ValueSet::Many(vs) => vs.iter().map(String::as_str).collect(),
        }
    }
}

pub type ConditionSpec = BTreeMap<String, ValueSet>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub domain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AllowedSpec {
    Values(Vec<String>),
    Tuples(Vec<Vec<String>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiteralSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<String>>,
    #[serde(rename = "in")]
    pub allowed: AllowedSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectSpec {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub when: ConditionSpec,
    pub set: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TerminalSpec {
    Flag(bool),
    When(ConditionSpec),
}

impl Default for TerminalSpec {
    fn default() -> Self {
        TerminalSpec::Flag(false)
    }
}

fn is_never(t: &TerminalSpec) -> bool {
    *t == TerminalSpec::Flag(false)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeSpec {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub effects: Vec<EffectSpec>,
    #[serde(default, skip_serializing_if = "is_never")]
    pub terminal: TerminalSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub preconditions: Vec<LiteralSpec>,
    pub outcomes: Vec<OutcomeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub from: ConditionSpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub to: ConditionSpec,
    pub value: f64,
}

fn default_discount() -> f64 {
    DEFAULT_DISCOUNT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub name: String,
    #[serde(default = "default_discount")]
    pub discount: f64,
    pub variables: Vec<VariableSpec>,
    pub initial: BTreeMap<String, String>,
    pub actions: Vec<ActionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rewards: Vec<RewardSpec>,
    /// Variables projected away by earlier transforms.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hidden: Vec<String>,
}

struct Resolver<'a> {
    variables: &'a [Variable],
}

impl Resolver<'_> {
    fn var(&self, name: &str, field: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::field(field, format!("unknown variable `{name}`")))
    }

    fn value(&self, var: usize, value: &str, field: &str) -> Result<Value> {
        self.variables[var].index_of(value).ok_or_else(|| {
            Error::field(field, format!("`{value}` is not in the domain of `{}`", self.variables[var].name))
        })
    }

    fn condition(&self, spec: &ConditionSpec, field: &str) -> Result<Condition> {
        let mut atoms = Vec::new();
        for (name, set) in spec {
            let f = format!("{field}.{name}");
            let var = self.var(name, &f)?;
            let values = set.values().into_iter().map(|v| self.value(var, v, &f)).collect::<Result<BTreeSet<_>>>()?;
            atoms.push(Atom { var, values });
        }
        Ok(Condition::new(atoms))
    }

    fn literal(&self, spec: &LiteralSpec, field: &str) -> Result<Literal> {
        let names: Vec<&str> = match (&spec.var, &spec.vars) {
            (Some(v), None) => vec![v.as_str()],
            (None, Some(vs)) if !vs.is_empty() => vs.iter().map(String::as_str).collect(),
            _ => return Err(Error::field(field, "exactly one of `var` or a non-empty `vars` is required")),
        };
        let vars = names
            .iter()
            .enumerate()
            .map(|(i, n)| self.var(n, &format!("{field}.vars[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let tuples: Vec<Vec<&str>> = match (&spec.allowed, vars.len()) {
            (AllowedSpec::Values(vs), 1) => vs.iter().map(|v| vec![v.as_str()]).collect(),
            (AllowedSpec::Tuples(ts), _) => ts.iter().map(|t| t.iter().map(String::as_str).collect()).collect(),
            (AllowedSpec::Values(_), _) => {
                return Err(Error::field(format!("{field}.in"), "multi-variable literals need value tuples"))
            }
        };
        let mut allowed = BTreeSet::new();
        for (i, t) in tuples.iter().enumerate() {
            let f = format!("{field}.in[{i}]");
            if t.len() != vars.len() {
                return Err(Error::field(f, format!("expected {} values", vars.len())));
            }
            let tuple = vars.iter().zip(t).map(|(&var, v)| self.value(var, v, &f)).collect::<Result<Vec<_>>>()?;
            allowed.insert(tuple);
        }
        let label = spec.label.clone().unwrap_or_else(|| {
            let values: Vec<String> = tuples.iter().map(|t| t.join("/")).collect();
            format!("{} in {{{}}}", names.join("/"), values.join(","))
        });
        Ok(Literal { label, vars, allowed })
    }
}

impl DomainFile {
    pub fn into_model(self) -> Result<FactoredMdp> {
        let variables: Vec<Variable> = self
            .variables
            .into_iter()
            .map(|v| Variable { name: v.name, domain: v.domain, feature: v.feature })
            .collect();
        let r = Resolver { variables: &variables };

        let mut initial = Vec::with_capacity(variables.len());
        for (i, var) in variables.iter().enumerate() {
            let value = self
                .initial
                .get(&var.name)
                .ok_or_else(|| Error::field(format!("initial.{}", var.name), "missing value"))?;
            initial.push(r.value(i, value, &format!("initial.{}", var.name))?);
        }
        for name in self.initial.keys() {
            r.var(name, &format!("initial.{name}"))?;
        }

        let mut actions = Vec::with_capacity(self.actions.len());
        for (ai, spec) in self.actions.iter().enumerate() {
            let field = format!("actions[{ai}]");
            let preconditions = spec
                .preconditions
                .iter()
                .enumerate()
                .map(|(i, l)| r.literal(l, &format!("{field}.preconditions[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let mut outcomes = Vec::with_capacity(spec.outcomes.len());
            for (oi, o) in spec.outcomes.iter().enumerate() {
                let of = format!("{field}.outcomes[{oi}]");
                let mut effects = Vec::new();
                for (ei, e) in o.effects.iter().enumerate() {
                    let ef = format!("{of}.effects[{ei}]");
                    let when = r.condition(&e.when, &format!("{ef}.when"))?;
                    for (name, value) in &e.set {
                        let sf = format!("{ef}.set.{name}");
                        let var = r.var(name, &sf)?;
                        effects.push(Effect::when(when.clone(), var, r.value(var, value, &sf)?));
                    }
                }
                let terminal = match &o.terminal {
                    TerminalSpec::Flag(false) => Terminal::Never,
                    TerminalSpec::Flag(true) => Terminal::Always,
                    TerminalSpec::When(c) => Terminal::When(r.condition(c, &format!("{of}.terminal"))?),
                };
                outcomes.push(Outcome { probability: o.p, effects, terminal });
            }
            actions.push(ActionDef {
                name: spec.name.clone(),
                schema: spec.schema.clone().unwrap_or_else(|| spec.name.clone()),
                origin: spec.origin.clone().unwrap_or_else(|| spec.name.clone()),
                preconditions,
                outcomes,
            });
        }

        let rewards = self
            .rewards
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let f = format!("rewards[{i}]");
                Ok(RewardRule {
                    action: spec.action.clone(),
                    from: r.condition(&spec.from, &format!("{f}.from"))?,
                    to: r.condition(&spec.to, &format!("{f}.to"))?,
                    value: spec.value,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let hidden = self
            .hidden
            .iter()
            .enumerate()
            .map(|(i, n)| r.var(n, &format!("hidden[{i}]")))
            .collect::<Result<BTreeSet<_>>>()?;

        let mdp = FactoredMdp {
            name: self.name,
            variables,
            initial: State::new(initial),
            actions,
            rewards,
            discount: self.discount,
            hidden,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    pub fn from_model(mdp: &FactoredMdp) -> Self {
        let vars = &mdp.variables;
        let name_of = |i: usize| vars[i].name.clone();
        let value_of = |i: usize, v: Value| vars[i].domain[v as usize].clone();
        let condition = |c: &Condition| -> ConditionSpec {
            c.atoms()
                .iter()
                .map(|a| {
                    let values: Vec<String> = a.values.iter().map(|&v| value_of(a.var, v)).collect();
                    let set = if values.len() == 1 { ValueSet::One(values[0].clone()) } else { ValueSet::Many(values) };
                    (name_of(a.var), set)
                })
                .collect()
        };
        let literal = |l: &Literal| -> LiteralSpec {
            if l.vars.len() == 1 {
                LiteralSpec {
                    label: Some(l.label.clone()),
                    var: Some(name_of(l.vars[0])),
                    vars: None,
                    allowed: AllowedSpec::Values(l.allowed.iter().map(|t| value_of(l.vars[0], t[0])).collect()),
                }
            } else {
                LiteralSpec {
                    label: Some(l.label.clone()),
                    var: None,
                    vars: Some(l.vars.iter().map(|&v| name_of(v)).collect()),
                    allowed: AllowedSpec::Tuples(
                        l.allowed
                            .iter()
                            .map(|t| l.vars.iter().zip(t).map(|(&var, &v)| value_of(var, v)).collect())
                            .collect(),
                    ),
                }
            }
        };
        DomainFile {
            name: mdp.name.clone(),
            discount: mdp.discount,
            variables: vars
                .iter()
                .map(|v| VariableSpec { name: v.name.clone(), domain: v.domain.clone(), feature: v.feature.clone() })
                .collect(),
            initial: vars.iter().enumerate().map(|(i, v)| (v.name.clone(), value_of(i, mdp.initial.get(i)))).collect(),
            actions: mdp
                .actions
                .iter()
                .map(|a| ActionSpec {
                    name: a.name.clone(),
                    schema: (a.schema != a.name).then(|| a.schema.clone()),
                    origin: (a.origin != a.name).then(|| a.origin.clone()),
                    preconditions: a.preconditions.iter().map(literal).collect(),
                    outcomes: a
                        .outcomes
                        .iter()
                        .map(|o| OutcomeSpec {
                            p: o.probability,
                            effects: o
                                .effects
                                .iter()
                                .map(|e| EffectSpec {
                                    when: condition(&e.when),
                                    set: BTreeMap::from([(name_of(e.var), value_of(e.var, e.value))]),
                                })
                                .collect(),
                            terminal: match &o.terminal {
                                Terminal::Never => TerminalSpec::Flag(false),
                                Terminal::Always => TerminalSpec::Flag(true),
                                Terminal::When(c) => TerminalSpec::When(condition(c)),
                            },
                        })
                        .collect(),
                })
                .collect(),
            rewards: mdp
                .rewards
                .iter()
                .map(|r| RewardSpec {
                    action: r.action.clone(),
                    from: condition(&r.from),
                    to: condition(&r.to),
                    value: r.value,
                })
                .collect(),
            hidden: mdp.hidden.iter().map(|&h| name_of(h)).collect(),
        }
    }
}

impl FactoredMdp {
    /// Resolves a literal written in the file vocabulary against this model.
    pub fn literal_from_spec(&self, spec: &LiteralSpec, field: &str) -> Result<Literal> {
        Resolver { variables: &self.variables }.literal(spec, field)
    }

    /// Renders a literal's allowed values, e.g. `fuel1 in {true}`.
    pub fn describe_literal(&self, l: &Literal) -> String {
        let names: Vec<&str> = l.vars.iter().map(|&v| self.variables[v].name.as_str()).collect();
        let tuples: Vec<String> = l
            .allowed
            .iter()
            .map(|t| {
                l.vars
                    .iter()
                    .zip(t)
                    .map(|(&var, &v)| self.variables[var].domain[v as usize].as_str())
                    .collect::<Vec<_>>()
                    .join("/")
            })
            .collect();
        format!("{} in {{{}}}", names.join("/"), tuples.join(","))
    }
}

impl FactoredMdp {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DomainFile = serde_json::from_str(text)?;
        file.into_model()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DomainFile::from_model(self)).expect("domain file serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
