//! Factored MDPs.
//!
//! A model is a list of finite-domain variables, an initial assignment, a list of
//! actions with preconditions and probabilistic (conditional) effects, additive
//! reward rules over `(s, a, s')` and a discount factor.
//!
//! A model may also carry a set of *hidden* variables. Hidden variables are the
//! result of a feature-projection transform: states of such a model hold
//! [`HIDDEN`] in those positions, and every query is answered by averaging the
//! underlying model over all completions of the hidden variables with uniform
//! weight.

mod format;
mod tabular;

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

pub use format::{ConditionSpec, DomainFile, LiteralSpec, ValueSet};
pub use tabular::{ActionRow, Branch, TabularMdp, TERMINAL};

/// Index of a value in its variable's domain.
pub type Value = u16;

/// Placeholder value for a variable that has been projected away.
pub const HIDDEN: Value = Value::MAX;

/// Default cap on the number of states [`FactoredMdp::enumerate_reachable`] may visit.
pub const DEFAULT_STATE_CAP: usize = 200_000;

pub const DEFAULT_DISCOUNT: f64 = 0.95;

const PROBABILITY_EPS: f64 = 1e-9;

/// Total assignment, one value per variable in variable order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(Vec<Value>);

impl State {
    pub fn new(values: Vec<Value>) -> Self {
        State(values)
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn get(&self, var: usize) -> Value {
        self.0[var]
    }

    pub fn with(mut self, var: usize, value: Value) -> Self {
        self.0[var] = value;
        self
    }

    pub(crate) fn set(&mut self, var: usize, value: Value) {
        self.0[var] = value;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<String>,
    /// Features group variables for state-space reduction; defaults to the variable name.
    pub feature: Option<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, domain: impl IntoIterator<Item = S>) -> Self {
        Variable { name: name.into(), domain: domain.into_iter().map(Into::into).collect(), feature: None }
    }

    /// A boolean variable; its designated "false" value is index 0.
    pub fn boolean(name: impl Into<String>) -> Self {
        Variable::new(name, ["false", "true"])
    }

    pub fn with_feature(mut self, feature: impl Into<String>) -> Self {
        self.feature = Some(feature.into());
        self
    }

    pub fn feature_name(&self) -> &str {
        self.feature.as_deref().unwrap_or(&self.name)
    }

    pub fn is_boolean(&self) -> bool {
        self.domain.len() == 2 && self.domain[0] == "false" && self.domain[1] == "true"
    }

    pub fn index_of(&self, value: &str) -> Option<Value> {
        self.domain.iter().position(|v| v == value).map(|i| i as Value)
    }
}

/// `var ∈ values`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub var: usize,
    pub values: BTreeSet<Value>,
}

/// Conjunction of atoms; the empty condition always holds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Condition(Vec<Atom>);

impl Condition {
    pub fn always() -> Self {
        Condition(Vec::new())
    }

    pub fn new(mut atoms: Vec<Atom>) -> Self {
        atoms.sort_by_key(|a| a.var);
        Condition(atoms)
    }

    /// Single-atom condition.
    pub fn on(var: usize, values: impl IntoIterator<Item = Value>) -> Self {
        Condition(vec![Atom { var, values: values.into_iter().collect() }])
    }

    pub fn and(mut self, var: usize, values: impl IntoIterator<Item = Value>) -> Self {
        self.0.push(Atom { var, values: values.into_iter().collect() });
        self.0.sort_by_key(|a| a.var);
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn holds(&self, s: &State) -> bool {
        self.0.iter().all(|a| a.values.contains(&s.get(a.var)))
    }

    pub fn is_always(&self) -> bool {
        self.0.is_empty()
    }
}

/// A named precondition: the tuple of values of `vars` must be in `allowed`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub label: String,
    pub vars: Vec<usize>,
    pub allowed: BTreeSet<Vec<Value>>,
}

impl Literal {
    pub fn single(label: impl Into<String>, var: usize, values: impl IntoIterator<Item = Value>) -> Self {
        Literal { label: label.into(), vars: vec![var], allowed: values.into_iter().map(|v| vec![v]).collect() }
    }

    pub fn holds(&self, s: &State) -> bool {
        let tuple: Vec<Value> = self.vars.iter().map(|&v| s.get(v)).collect();
        self.allowed.contains(&tuple)
    }
}

/// Assign `var := value` when `when` holds in the source state.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect {
    pub when: Condition,
    pub var: usize,
    pub value: Value,
}

impl Effect {
    pub fn set(var: usize, value: Value) -> Self {
        Effect { when: Condition::always(), var, value }
    }

    pub fn when(when: Condition, var: usize, value: Value) -> Self {
        Effect { when, var, value }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Terminal {
    Never,
    Always,
    /// Terminal when the condition holds in the source state.
    When(Condition),
}

impl Terminal {
    pub fn holds(&self, s: &State) -> bool {
        match self {
            Terminal::Never => false,
            Terminal::Always => true,
            Terminal::When(c) => c.holds(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub probability: f64,
    pub effects: Vec<Effect>,
    pub terminal: Terminal,
}

impl Outcome {
    pub fn new(probability: f64, effects: Vec<Effect>) -> Self {
        Outcome { probability, effects, terminal: Terminal::Never }
    }

    pub fn terminal(mut self, terminal: Terminal) -> Self {
        self.terminal = terminal;
        self
    }

    fn apply(&self, s: &State) -> State {
        let mut next = s.clone();
        for e in &self.effects {
            if e.when.holds(s) {
                next.set(e.var, e.value);
            }
        }
        next
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionDef {
    pub name: String,
    /// Action group addressed by transforms; defaults to the name.
    pub schema: String,
    /// Name of the action this one was derived from; reward rules match on it.
    pub origin: String,
    pub preconditions: Vec<Literal>,
    pub outcomes: Vec<Outcome>,
}

impl ActionDef {
    pub fn new(name: impl Into<String>, outcomes: Vec<Outcome>) -> Self {
        let name = name.into();
        ActionDef { schema: name.clone(), origin: name.clone(), name, preconditions: Vec::new(), outcomes }
    }

    pub fn in_schema(mut self, schema: impl Into<String>) -> Self {
        self.schema = schema.into();
        self
    }

    pub fn requires(mut self, literal: Literal) -> Self {
        self.preconditions.push(literal);
        self
    }

    pub fn is_stochastic(&self) -> bool {
        self.outcomes.len() >= 2
    }

    fn applicable(&self, s: &State) -> bool {
        self.preconditions.iter().all(|l| l.holds(s))
    }

    fn answers_to(&self, name: &str) -> bool {
        self.name == name || self.origin == name || self.schema == name
    }
}

/// Reward `value` on `(s, a, s')` when the action matches, `from` holds in `s`
/// and `to` holds in `s'`. Matching rules add up.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardRule {
    /// Matches an action's name, origin or schema; `None` matches every action.
    pub action: Option<String>,
    pub from: Condition,
    pub to: Condition,
    pub value: f64,
}

impl RewardRule {
    pub fn new(value: f64) -> Self {
        RewardRule { action: None, from: Condition::always(), to: Condition::always(), value }
    }

    pub fn for_action(mut self, action: impl Into<String>) -> Self {
        self.action = Some(action.into());
        self
    }

    pub fn from(mut self, c: Condition) -> Self {
        self.from = c;
        self
    }

    pub fn to(mut self, c: Condition) -> Self {
        self.to = c;
        self
    }
}

/// One successor of a `(state, action)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Successor {
    pub state: State,
    pub terminal: bool,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactoredMdp {
    pub(crate) name: String,
    pub(crate) variables: Vec<Variable>,
    pub(crate) initial: State,
    pub(crate) actions: Vec<ActionDef>,
    pub(crate) rewards: Vec<RewardRule>,
    pub(crate) discount: f64,
    pub(crate) hidden: BTreeSet<usize>,
}

impl FactoredMdp {
    pub fn new(
        name: impl Into<String>,
        variables: Vec<Variable>,
        initial: State,
        actions: Vec<ActionDef>,
        rewards: Vec<RewardRule>,
        discount: f64,
    ) -> Result<Self> {
        let mdp =
            FactoredMdp { name: name.into(), variables, initial, actions, rewards, discount, hidden: BTreeSet::new() };
        mdp.validate()?;
        Ok(mdp)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn actions(&self) -> &[ActionDef] {
        &self.actions
    }

    pub fn rewards(&self) -> &[RewardRule] {
        &self.rewards
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn hidden(&self) -> &BTreeSet<usize> {
        &self.hidden
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_discount(mut self, discount: f64) -> Self {
        self.discount = discount;
        self
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionDef> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn action_names(&self) -> impl Iterator<Item = &str> {
        self.actions.iter().map(|a| a.name.as_str())
    }

    /// Value index of `value` for the named variable.
    pub fn value(&self, var: &str, value: &str) -> Option<Value> {
        self.variable_index(var).and_then(|i| self.variables[i].index_of(value))
    }

    /// Builds a state from `(variable, value)` names; unspecified variables take
    /// their first domain value.
    pub fn state_from(&self, assignment: &[(&str, &str)]) -> Result<State> {
        let mut values = vec![0; self.variables.len()];
        for (var, value) in assignment {
            let i =
                self.variable_index(var).ok_or_else(|| Error::ModelMismatch(format!("unknown variable `{var}`")))?;
            values[i] = self.variables[i]
                .index_of(value)
                .ok_or_else(|| Error::ModelMismatch(format!("`{value}` not in domain of `{var}`")))?;
        }
        Ok(self.project(&State(values)))
    }

    /// Initial state as seen through the hidden-variable projection.
    pub fn initial_state(&self) -> State {
        self.project(&self.initial)
    }

    /// The stored, unprojected initial assignment.
    pub fn full_initial_state(&self) -> &State {
        &self.initial
    }

    pub fn project(&self, s: &State) -> State {
        if self.hidden.is_empty() {
            return s.clone();
        }
        let mut out = s.clone();
        for &h in &self.hidden {
            out.set(h, HIDDEN);
        }
        out
    }

    pub fn check_state(&self, s: &State) -> Result<()> {
        if s.len() != self.variables.len() {
            return Err(Error::ModelMismatch(format!(
                "state has {} values, model has {} variables",
                s.len(),
                self.variables.len()
            )));
        }
        for (i, (&v, var)) in s.values().iter().zip(&self.variables).enumerate() {
            let hidden = self.hidden.contains(&i);
            let ok = if hidden { v == HIDDEN } else { (v as usize) < var.domain.len() };
            if !ok {
                return Err(Error::ModelMismatch(format!(
                    "invalid value for `{}` in state {}",
                    var.name,
                    self.render_state(s)
                )));
            }
        }
        Ok(())
    }

    pub fn render_state(&self, s: &State) -> String {
        let parts: Vec<String> = self
            .variables
            .iter()
            .zip(s.values())
            .map(|(var, &v)| {
                let value =
                    if v == HIDDEN { "*" } else { var.domain.get(v as usize).map(String::as_str).unwrap_or("?") };
                format!("{}={}", var.name, value)
            })
            .collect();
        format!("[{}]", parts.join(","))
    }

    /// Checks every structural invariant of the model.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(Error::InvalidModel(format!("discount {} not in [0,1]", self.discount)));
        }
        let mut names = HashSet::new();
        for var in &self.variables {
            if var.domain.is_empty() {
                return Err(Error::InvalidModel(format!("variable `{}` has an empty domain", var.name)));
            }
            if var.domain.len() >= HIDDEN as usize {
                return Err(Error::InvalidModel(format!("domain of `{}` is too large", var.name)));
            }
            let unique: HashSet<&String> = var.domain.iter().collect();
            if unique.len() != var.domain.len() {
                return Err(Error::InvalidModel(format!("domain of `{}` repeats a value", var.name)));
            }
            if !names.insert(var.name.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate variable `{}`", var.name)));
            }
        }
        for &h in &self.hidden {
            if h >= self.variables.len() {
                return Err(Error::InvalidModel(format!("hidden variable index {h} out of range")));
            }
        }
        if self.initial.values().contains(&HIDDEN) {
            return Err(Error::InvalidModel("initial state must be a total assignment".into()));
        }
        self.check_state(&self.initial_state())?;

        let mut action_names = HashSet::new();
        for a in &self.actions {
            if !action_names.insert(a.name.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate action `{}`", a.name)));
            }
            for lit in &a.preconditions {
                if lit.vars.is_empty() {
                    return Err(Error::InvalidModel(format!(
                        "`{}`: literal `{}` names no variable",
                        a.name, lit.label
                    )));
                }
                for tuple in &lit.allowed {
                    if tuple.len() != lit.vars.len() {
                        return Err(Error::InvalidModel(format!(
                            "`{}`: literal `{}` has a malformed tuple",
                            a.name, lit.label
                        )));
                    }
                    for (&var, &v) in lit.vars.iter().zip(tuple) {
                        self.check_value(var, v, &a.name)?;
                    }
                }
            }
            if a.outcomes.is_empty() {
                return Err(Error::InvalidModel(format!("action `{}` has no outcomes", a.name)));
            }
            let total: f64 = a.outcomes.iter().map(|o| o.probability).sum();
            if (total - 1.0).abs() > PROBABILITY_EPS {
                return Err(Error::InvalidModel(format!("outcome probabilities of `{}` sum to {total}", a.name)));
            }
            for o in &a.outcomes {
                if !(o.probability > 0.0 && o.probability <= 1.0 + PROBABILITY_EPS) {
                    return Err(Error::InvalidModel(format!(
                        "`{}` has an outcome with probability {}",
                        a.name, o.probability
                    )));
                }
                let mut unconditional = HashSet::new();
                for e in &o.effects {
                    self.check_value(e.var, e.value, &a.name)?;
                    self.check_condition(&e.when, &a.name)?;
                    if e.when.is_always() && !unconditional.insert(e.var) {
                        return Err(Error::InvalidModel(format!(
                            "an outcome of `{}` sets `{}` twice",
                            a.name, self.variables[e.var].name
                        )));
                    }
                }
                if let Terminal::When(c) = &o.terminal {
                    self.check_condition(c, &a.name)?;
                }
            }
        }
        for r in &self.rewards {
            self.check_condition(&r.from, "reward rule")?;
            self.check_condition(&r.to, "reward rule")?;
            if !r.value.is_finite() {
                return Err(Error::InvalidModel("reward rule value is not finite".into()));
            }
        }
        Ok(())
    }

    fn check_value(&self, var: usize, v: Value, ctx: &str) -> Result<()> {
        let var_def = self
            .variables
            .get(var)
            .ok_or_else(|| Error::InvalidModel(format!("`{ctx}` refers to variable index {var}")))?;
        if (v as usize) >= var_def.domain.len() {
            return Err(Error::InvalidModel(format!(
                "`{ctx}` uses value index {v} outside the domain of `{}`",
                var_def.name
            )));
        }
        Ok(())
    }

    fn check_condition(&self, c: &Condition, ctx: &str) -> Result<()> {
        for atom in c.atoms() {
            for &v in &atom.values {
                self.check_value(atom.var, v, ctx)?;
            }
        }
        Ok(())
    }

    /// Stable-within-a-build hash of the whole model.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        format!("{self:?}").hash(&mut h);
        h.finish()
    }

    fn lookup_action(&self, name: &str) -> Result<usize> {
        self.action_index(name).ok_or_else(|| Error::ModelMismatch(format!("unknown action `{name}`")))
    }

    /// All assignments to the hidden variables, written into `s`.
    fn completions(&self, s: &State) -> Vec<State> {
        let mut out = vec![s.clone()];
        for &h in &self.hidden {
            let size = self.variables[h].domain.len() as Value;
            out = out.into_iter().flat_map(|c| (0..size).map(move |v| c.clone().with(h, v))).collect();
        }
        out
    }

    pub(crate) fn is_applicable_idx(&self, s: &State, action: usize) -> bool {
        let a = &self.actions[action];
        if self.hidden.is_empty() {
            return a.applicable(s);
        }
        self.completions(s).iter().any(|c| a.applicable(c))
    }

    /// Actions whose every precondition holds in `s`, in model order. With hidden
    /// variables an action is applicable if it is applicable in some completion.
    pub fn applicable_actions(&self, s: &State) -> Result<Vec<&str>> {
        self.check_state(s)?;
        Ok(self.applicable_indices(s).into_iter().map(|i| self.actions[i].name.as_str()).collect())
    }

    pub(crate) fn applicable_indices(&self, s: &State) -> Vec<usize> {
        if self.hidden.is_empty() {
            return (0..self.actions.len()).filter(|&i| self.actions[i].applicable(s)).collect();
        }
        let completions = self.completions(s);
        (0..self.actions.len()).filter(|&i| completions.iter().any(|c| self.actions[i].applicable(c))).collect()
    }

    fn rule_reward(&self, s: &State, action: &ActionDef, next: &State) -> f64 {
        self.rewards
            .iter()
            .filter(|r| r.action.as_deref().is_none_or(|n| action.answers_to(n)))
            .filter(|r| r.from.holds(s) && r.to.holds(next))
            .map(|r| r.value)
            .sum()
    }

    /// Successor branches of a concrete (fully assigned) state, each with its reward.
    fn concrete_branches(&self, s: &State, action: usize) -> Vec<Branch<State>> {
        let a = &self.actions[action];
        let mut out: Vec<Branch<State>> = Vec::with_capacity(a.outcomes.len());
        for o in &a.outcomes {
            let next = o.apply(s);
            let terminal = o.terminal.holds(s);
            let reward = self.rule_reward(s, a, &next);
            push_branch(&mut out, next, terminal, o.probability, reward);
        }
        out
    }

    /// Successor branches of `(s, action)`, merged by `(successor, terminal)`.
    ///
    /// With hidden variables each completion contributes with uniform weight; a
    /// completion where the action is inapplicable contributes a zero-reward
    /// self-loop. Rewards of abstract branches carry the averaged expected reward.
    pub(crate) fn branches(&self, s: &State, action: usize) -> Vec<Branch<State>> {
        if self.hidden.is_empty() {
            return self.concrete_branches(s, action);
        }
        let completions = self.completions(s);
        let weight = 1.0 / completions.len() as f64;
        let mut merged: Vec<Branch<State>> = Vec::new();
        let mut expected = 0.0;
        for c in &completions {
            if self.actions[action].applicable(c) {
                for b in self.concrete_branches(c, action) {
                    expected += weight * b.probability * b.reward;
                    push_branch(&mut merged, self.project(&b.next), b.terminal, weight * b.probability, 0.0);
                }
            } else {
                push_branch(&mut merged, s.clone(), false, weight, 0.0);
            }
        }
        for b in &mut merged {
            b.reward = expected;
        }
        merged
    }

    pub fn transition(&self, s: &State, action: &str) -> Result<Vec<Successor>> {
        self.check_state(s)?;
        let ai = self.lookup_action(action)?;
        if !self.is_applicable_idx(s, ai) {
            return Err(Error::PreconditionViolation { action: action.to_string(), state: self.render_state(s) });
        }
        Ok(self
            .branches(s, ai)
            .into_iter()
            .map(|b| Successor { state: b.next, terminal: b.terminal, probability: b.probability })
            .collect())
    }

    /// `r(s, a, s')`: sum of all matching reward rules. For a model with hidden
    /// variables this is the weighted expected reward `R̄(s̄, a)`.
    pub fn reward(&self, s: &State, action: &str, next: &State) -> Result<f64> {
        self.check_state(s)?;
        self.check_state(next)?;
        let ai = self.lookup_action(action)?;
        if self.hidden.is_empty() {
            return Ok(self.rule_reward(s, &self.actions[ai], next));
        }
        if !self.is_applicable_idx(s, ai) {
            return Err(Error::PreconditionViolation { action: action.to_string(), state: self.render_state(s) });
        }
        Ok(self.branches(s, ai).first().map(|b| b.reward).unwrap_or(0.0))
    }

    /// `Σ_{s'} P(s,a,s') r(s,a,s')`.
    pub fn expected_reward(&self, s: &State, action: &str) -> Result<f64> {
        self.check_state(s)?;
        let ai = self.lookup_action(action)?;
        if !self.is_applicable_idx(s, ai) {
            return Err(Error::PreconditionViolation { action: action.to_string(), state: self.render_state(s) });
        }
        Ok(self.branches(s, ai).iter().map(|b| b.probability * b.reward).sum())
    }

    /// Breadth-first closure from the initial state. Terminal transitions end the
    /// episode and do not contribute states.
    pub fn enumerate_reachable(&self) -> Result<Vec<State>> {
        self.enumerate_reachable_capped(DEFAULT_STATE_CAP)
    }

    pub fn enumerate_reachable_capped(&self, cap: usize) -> Result<Vec<State>> {
        let start = self.initial_state();
        let mut seen: HashSet<State> = HashSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start);
        while let Some(s) = queue.pop_front() {
            for ai in self.applicable_indices(&s) {
                for b in self.branches(&s, ai) {
                    if !b.terminal && !seen.contains(&b.next) {
                        if seen.len() >= cap {
                            return Err(Error::Capacity { limit: cap });
                        }
                        seen.insert(b.next.clone());
                        queue.push_back(b.next);
                    }
                }
            }
            order.push(s);
        }
        Ok(order)
    }

    /// Reachable states with no applicable action. These are treated as terminal.
    pub fn dead_ends(&self) -> Result<Vec<State>> {
        Ok(self.enumerate_reachable()?.into_iter().filter(|s| self.applicable_indices(s).is_empty()).collect())
    }

    /// Boolean variables this action's outcomes set to false (its delete effects).
    pub fn delete_effects(&self, action: &ActionDef) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (oi, o) in action.outcomes.iter().enumerate() {
            for (ei, e) in o.effects.iter().enumerate() {
                if self.is_delete_effect(e) {
                    out.push((oi, ei));
                }
            }
        }
        out
    }

    pub(crate) fn is_delete_effect(&self, e: &Effect) -> bool {
        self.variables[e.var].is_boolean() && e.value == 0
    }

    /// Distinct action schemas in order of first appearance.
    pub fn schemas(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in &self.actions {
            if !out.contains(&a.schema.as_str()) {
                out.push(&a.schema);
            }
        }
        out
    }

    /// Distinct features in order of first appearance.
    pub fn features(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for v in &self.variables {
            if !out.contains(&v.feature_name()) {
                out.push(v.feature_name());
            }
        }
        out
    }

    pub fn feature_variables(&self, feature: &str) -> Vec<usize> {
        (0..self.variables.len()).filter(|&i| self.variables[i].feature_name() == feature).collect()
    }
}

impl fmt::Display for FactoredMdp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} variables, {} actions, γ={})",
            self.name,
            self.variables.len(),
            self.actions.len(),
            self.discount
        )
    }
}

fn push_branch(out: &mut Vec<Branch<State>>, next: State, terminal: bool, probability: f64, reward: f64) {
    if let Some(b) = out.iter_mut().find(|b| b.terminal == terminal && b.next == next) {
        b.probability += probability;
    } else {
        out.push(Branch { next, terminal, probability, reward });
    }
}
