//! Benchmark fixtures and random-model generators.

mod apple;
mod frozen_lake;
mod random;
mod taxi;
mod two_agent;

use crate::anticipation::PartialPolicy;
use crate::mdp::{ActionDef, Condition, Effect, FactoredMdp, Literal, Outcome, RewardRule, State, Variable};
use crate::solvers::{extract_policy, value_iteration, SolverConfig};
use crate::transforms::Catalog;

pub use apple::{apple_anticipated, build_apple_picking, AppleParams};
pub use frozen_lake::{build_frozen_lake, frozen_lake_anticipated, FrozenLakeParams};
pub use random::{random_instance, random_mdp, RandomInstance};
pub use taxi::{build_taxi_fuel, taxi_state, TaxiParams};
pub use two_agent::{build_two_agent_grid, TwoAgentParams};

/// Two states `L`, `R`; `go` reaches `R` from `L` with probability 0.8 and earns 1.
pub fn build_twocell() -> FactoredMdp {
    let pos = Variable::new("pos", ["L", "R"]);
    let go = ActionDef::new("go", vec![Outcome::new(0.8, vec![Effect::set(0, 1)]), Outcome::new(0.2, vec![])]);
    let stay = ActionDef::new("stay", vec![Outcome::new(1.0, vec![])]);
    let reward = RewardRule::new(1.0).for_action("go").from(Condition::on(0, [0])).to(Condition::on(0, [1]));
    FactoredMdp::new("twocell", vec![pos], State::new(vec![0]), vec![go, stay], vec![reward], 0.9)
        .expect("twocell is valid")
}

/// A named benchmark instance: model, anticipated policy and transform catalog.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub model: FactoredMdp,
    pub anticipated: PartialPolicy,
    pub catalog: Catalog,
}

/// Names accepted by [`fixture`].
pub const BUILTIN_NAMES: [&str; 5] = ["twocell", "taxi-fuel", "frozen-lake", "apple-picking", "two-agent"];

/// The four domains of the strategy comparison suite.
pub const SUITE_NAMES: [&str; 4] = ["taxi-fuel", "frozen-lake", "apple-picking", "two-agent"];

pub fn fixture(name: &str) -> Option<Fixture> {
    Some(match name {
        "twocell" => {
            let model = build_twocell();
            let mut anticipated = PartialPolicy::new();
            anticipated.insert(model.initial_state(), "go");
            Fixture { name: "twocell", model, anticipated, catalog: Catalog::all_kinds() }
        }
        "taxi-fuel" => {
            let (model, anticipated) = build_taxi_fuel(&TaxiParams::default());
            Fixture { name: "taxi-fuel", model, anticipated, catalog: taxi::catalog() }
        }
        "frozen-lake" => {
            let p = FrozenLakeParams::default();
            Fixture {
                name: "frozen-lake",
                model: build_frozen_lake(&p),
                anticipated: frozen_lake_anticipated(&p),
                catalog: frozen_lake::catalog(),
            }
        }
        "apple-picking" => {
            let p = AppleParams::default();
            Fixture {
                name: "apple-picking",
                model: build_apple_picking(&p),
                anticipated: apple_anticipated(&p),
                catalog: apple::catalog(),
            }
        }
        "two-agent" => {
            let (model, anticipated) = build_two_agent_grid(&TwoAgentParams::default());
            Fixture { name: "two-agent", model, anticipated, catalog: two_agent::catalog() }
        }
        _ => return None,
    })
}

/// Every builtin model plus a small random one; used for format round trips.
pub fn builtin_models() -> Vec<FactoredMdp> {
    let mut out: Vec<FactoredMdp> = BUILTIN_NAMES.iter().filter_map(|n| fixture(n)).map(|f| f.model).collect();
    out.push(random_mdp(7, 12, 3, 2));
    out
}

/// Greedy rollout of the optimal policy of a deterministic observer model, as
/// `(state, action)` pairs from the initial state until termination.
pub(crate) fn observer_path(observer: &FactoredMdp) -> Vec<(State, String)> {
    let q = value_iteration(observer, &SolverConfig::default()).expect("observer model is small");
    let pi = extract_policy(&q);
    let tab = q.tabular();
    let mut out = Vec::new();
    let mut s = 0;
    while out.len() < tab.len() {
        let Some(a) = pi.action(s) else { break };
        out.push((tab.states[s].clone(), a.to_string()));
        let row = tab.rows[s].iter().find(|r| tab.action_names[r.action] == a).expect("greedy action is applicable");
        let b = &row.branches[0];
        if b.terminal {
            break;
        }
        s = b.next;
    }
    out
}

/// `rows × cols` grid over variables `row`, `col`.
pub(crate) struct Grid {
    pub rows: usize,
    pub cols: usize,
}

pub(crate) const DIRECTIONS: [(&str, i32, i32); 4] =
    [("north", -1, 0), ("south", 1, 0), ("east", 0, 1), ("west", 0, -1)];

impl Grid {
    pub fn variables(&self) -> Vec<Variable> {
        vec![
            Variable::new("row", (0..self.rows).map(|r| r.to_string())),
            Variable::new("col", (0..self.cols).map(|c| c.to_string())),
        ]
    }

    /// Conditional effects moving one cell in direction `(dr, dc)`; moves off the
    /// grid leave the position unchanged.
    pub fn move_effects(&self, dr: i32, dc: i32) -> Vec<Effect> {
        let mut out = Vec::new();
        let (var, len, d) = if dr != 0 { (0, self.rows, dr) } else { (1, self.cols, dc) };
        for from in 0..len as i32 {
            let to = from + d;
            if (0..len as i32).contains(&to) {
                out.push(Effect::when(Condition::on(var, [from as u16]), var, to as u16));
            }
        }
        out
    }

    /// `no-<dir>-edge`: the move stays on the grid.
    pub fn edge_literal(&self, name: &str, dr: i32, dc: i32) -> Literal {
        let (var, len, d) = if dr != 0 { (0, self.rows, dr) } else { (1, self.cols, dc) };
        let allowed = (0..len as i32).filter(|v| (0..len as i32).contains(&(v + d))).map(|v| v as u16);
        Literal::single(format!("no-{name}-edge"), var, allowed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::TabularMdp;

    #[test]
    fn twocell_basics() {
        let m = build_twocell();
        assert_eq!(m.enumerate_reachable().unwrap().len(), 2);
        let q = value_iteration(&m, &SolverConfig::default()).unwrap();
        assert!((q.value(&m.initial_state()).unwrap() - 0.8 / 0.82).abs() < 1e-4);
        assert_eq!(extract_policy(&q).action_at(&m.initial_state()), Some("go"));
    }

    #[test]
    fn every_fixture_is_valid_and_normalized() {
        for name in BUILTIN_NAMES {
            let f = fixture(name).unwrap();
            f.model.validate().unwrap();
            f.anticipated.validate(&f.model).unwrap();
            assert!(!f.anticipated.is_empty(), "{name}");
            let tab = TabularMdp::compile(&f.model).unwrap();
            for row in &tab.rows {
                for ar in row {
                    let total: f64 = ar.branches.iter().map(|b| b.probability).sum();
                    assert!((total - 1.0).abs() < 1e-9, "{name}");
                }
            }
        }
        assert!(fixture("sokoban").is_none());
    }
}
