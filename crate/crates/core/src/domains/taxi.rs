//! Taxi with fuel: the taxi must pick up a passenger and drop them off, each move
//! burns one unit of fuel, and the tank can only be refilled at the station.
//!
//! Fuel is stored in unary as boolean flags `fuel1..fuelF` (feature `fuel`):
//! level `k` means flags `1..=k` are true. A move clears the highest true flag,
//! so the decrement is a boolean delete effect.

use super::observer_path;
use crate::anticipation::PartialPolicy;
use crate::mdp::{
    ActionDef, Condition, Effect, FactoredMdp, Literal, Outcome, RewardRule, State, Terminal, Value, Variable,
};
use crate::transforms::{Catalog, TransformKind, TransformSchema};

#[derive(Clone, Debug, PartialEq)]
pub struct TaxiParams {
    pub rows: usize,
    pub cols: usize,
    /// Zero builds the observer's fuel-less model.
    pub fuel_capacity: usize,
    pub initial_fuel: usize,
    pub start: (usize, usize),
    pub passenger: (usize, usize),
    pub destination: (usize, usize),
    pub station: (usize, usize),
    /// Cells with a wall on their east side.
    pub walls: Vec<(usize, usize)>,
    pub step_cost: f64,
    pub dropoff_reward: f64,
    pub discount: f64,
}

impl Default for TaxiParams {
    fn default() -> Self {
        TaxiParams {
            rows: 5,
            cols: 5,
            fuel_capacity: 12,
            initial_fuel: 5,
            start: (2, 2),
            passenger: (0, 4),
            destination: (4, 4),
            station: (4, 0),
            walls: vec![(3, 1), (4, 1)],
            step_cost: 1.0,
            dropoff_reward: 50.0,
            discount: 0.95,
        }
    }
}

fn cell_name(r: usize, c: usize) -> String {
    format!("r{r}c{c}")
}

impl TaxiParams {
    fn cell(&self, r: usize, c: usize) -> Value {
        (r * self.cols + c) as Value
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| (r, c)))
    }
}

const TAXI: usize = 0;
const PASSENGER: usize = 1;
const FUEL: usize = 2;

/// The taxi model and the observer's anticipated policy.
pub fn build_taxi_fuel(p: &TaxiParams) -> (FactoredMdp, PartialPolicy) {
    let model = build(p);
    let observer = build(&TaxiParams { fuel_capacity: 0, initial_fuel: 0, ..p.clone() });
    let mut anticipated = PartialPolicy::new();
    let mut moves = 0;
    for (s, action) in observer_path(&observer) {
        let taxi = s.get(TAXI) as usize;
        let passenger = model.variables()[PASSENGER].domain[s.get(PASSENGER) as usize].clone();
        let fuel = p.initial_fuel.saturating_sub(moves);
        let state = taxi_state(&model, p, (taxi / p.cols, taxi % p.cols), &passenger, fuel);
        if action.starts_with("move") {
            moves += 1;
        }
        anticipated.insert(state, action);
    }
    (model, anticipated)
}

/// State of `mdp` (built from `p`) with the taxi at `cell`, the passenger
/// `"waiting"` or `"riding"`, and `fuel` units in the tank.
pub fn taxi_state(mdp: &FactoredMdp, p: &TaxiParams, cell: (usize, usize), passenger: &str, fuel: usize) -> State {
    let mut values = vec![0; mdp.variables().len()];
    values[TAXI] = p.cell(cell.0, cell.1);
    values[PASSENGER] = mdp.variables()[PASSENGER].index_of(passenger).expect("waiting or riding");
    for k in 0..p.fuel_capacity {
        values[FUEL + k] = Value::from(k < fuel);
    }
    State::new(values)
}

fn build(p: &TaxiParams) -> FactoredMdp {
    let mut variables = vec![
        Variable::new("taxi", p.cells().map(|(r, c)| cell_name(r, c))),
        Variable::new("passenger", ["waiting", "riding"]),
    ];
    for k in 1..=p.fuel_capacity {
        variables.push(Variable::boolean(format!("fuel{k}")).with_feature("fuel"));
    }
    let at = |cell: (usize, usize)| [p.cell(cell.0, cell.1)];
    let burn: Vec<Effect> = (0..p.fuel_capacity)
        .map(|k| {
            let mut when = Condition::on(FUEL + k, [1]);
            if k + 1 < p.fuel_capacity {
                when = when.and(FUEL + k + 1, [0]);
            }
            Effect::when(when, FUEL + k, 0)
        })
        .collect();
    let has_fuel = Literal::single("fuel>0", FUEL, [1]);

    let mut actions = Vec::new();
    for (dir, dr, dc) in super::DIRECTIONS {
        let target = |r: usize, c: usize| {
            let (nr, nc) = (r as i32 + dr, c as i32 + dc);
            ((0..p.rows as i32).contains(&nr) && (0..p.cols as i32).contains(&nc)).then_some((nr as usize, nc as usize))
        };
        let blocked = |r: usize, c: usize| match dir {
            "east" => p.walls.contains(&(r, c)),
            "west" => c > 0 && p.walls.contains(&(r, c - 1)),
            _ => false,
        };
        let mut effects: Vec<Effect> = p
            .cells()
            .filter_map(|(r, c)| {
                target(r, c).map(|(nr, nc)| Effect::when(Condition::on(TAXI, at((r, c))), TAXI, p.cell(nr, nc)))
            })
            .collect();
        effects.extend(burn.iter().cloned());
        let mut a = ActionDef::new(format!("move-{dir}"), vec![Outcome::new(1.0, effects)]).in_schema("move").requires(
            Literal::single(
                format!("no-{dir}-edge"),
                TAXI,
                p.cells().filter(|&(r, c)| target(r, c).is_some()).map(|(r, c)| p.cell(r, c)),
            ),
        );
        if p.cells().any(|(r, c)| blocked(r, c)) {
            a = a.requires(Literal::single(
                format!("no-wall-{dir}"),
                TAXI,
                p.cells().filter(|&(r, c)| !blocked(r, c)).map(|(r, c)| p.cell(r, c)),
            ));
        }
        if p.fuel_capacity > 0 {
            a = a.requires(has_fuel.clone());
        }
        actions.push(a);
    }
    actions.push(
        ActionDef::new("pickup", vec![Outcome::new(1.0, vec![Effect::set(PASSENGER, 1)])])
            .requires(Literal::single("at-passenger", TAXI, at(p.passenger)))
            .requires(Literal::single("waiting", PASSENGER, [0])),
    );
    actions.push(
        ActionDef::new("dropoff", vec![Outcome::new(1.0, vec![]).terminal(Terminal::Always)])
            .requires(Literal::single("at-destination", TAXI, at(p.destination)))
            .requires(Literal::single("riding", PASSENGER, [1])),
    );
    if p.fuel_capacity > 0 {
        let fill = (0..p.fuel_capacity).map(|k| Effect::set(FUEL + k, 1)).collect();
        actions.push(ActionDef::new("refuel", vec![Outcome::new(1.0, fill)]).requires(Literal::single(
            "at-station",
            TAXI,
            at(p.station),
        )));
    }
    let rewards = vec![RewardRule::new(-p.step_cost), RewardRule::new(p.dropoff_reward).for_action("dropoff")];
    let mut initial = vec![p.cell(p.start.0, p.start.1), 0];
    initial.extend((0..p.fuel_capacity).map(|k| Value::from(k < p.initial_fuel)));
    let name = if p.fuel_capacity > 0 { "taxi-fuel" } else { "taxi" };
    FactoredMdp::new(name, variables, State::new(initial), actions, rewards, p.discount)
        .expect("taxi parameters are valid")
}

pub(crate) fn catalog() -> Catalog {
    Catalog::new(vec![
        TransformSchema::new(TransformKind::PreconditionRelaxation),
        TransformSchema::new(TransformKind::DeleteRelaxation),
        TransformSchema::new(TransformKind::StateSpaceReduction),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{extract_policy, value_iteration, SolverConfig};

    /// First `n` actions of the greedy policy from the initial state.
    fn prefix(m: &FactoredMdp, n: usize) -> Vec<String> {
        let q = value_iteration(m, &SolverConfig::default()).unwrap();
        let pi = extract_policy(&q);
        let tab = q.tabular();
        let mut s = 0;
        let mut out = Vec::new();
        for _ in 0..n {
            let a = pi.action(s).unwrap().to_string();
            let row = tab.rows[s].iter().find(|r| tab.action_names[r.action] == a).unwrap();
            out.push(a);
            if row.branches[0].terminal {
                break;
            }
            s = row.branches[0].next;
        }
        out
    }

    #[test]
    fn actor_refuels_before_pickup() {
        let (m, _) = build_taxi_fuel(&TaxiParams::default());
        let plan = prefix(&m, 30);
        let refuel = plan.iter().position(|a| a == "refuel").expect("visits the station");
        let pickup = plan.iter().position(|a| a == "pickup").expect("picks up");
        assert!(refuel < pickup, "{plan:?}");
        assert_eq!(plan.last().map(String::as_str), Some("dropoff"));
    }

    #[test]
    fn anticipated_path_heads_to_passenger() {
        let p = TaxiParams::default();
        let (m, anticipated) = build_taxi_fuel(&p);
        let first = anticipated.entries().next().unwrap();
        assert_eq!(first.0, m.full_initial_state());
        assert!(first.1 == "move-north" || first.1 == "move-east");
        assert!(anticipated.entries().all(|(_, a)| a != "refuel"));
        // the tank runs dry on the way
        let fuel1 = m.variable_index("fuel1").unwrap();
        assert!(anticipated.entries().any(|(s, _)| s.get(fuel1) == 0));
    }

    #[test]
    fn state_helper_matches_initial_state() {
        let p = TaxiParams::default();
        let (m, _) = build_taxi_fuel(&p);
        assert_eq!(&taxi_state(&m, &p, p.start, "waiting", p.initial_fuel), m.full_initial_state());
    }
}
