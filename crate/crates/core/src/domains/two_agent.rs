//! Two agents swap ends of a corridor that has a one-cell bay off its middle.
//! Joint actions move both agents at once; the `no-collision` precondition keeps
//! them from sharing a cell or passing through each other.

use std::collections::BTreeSet;

use super::observer_path;
use crate::anticipation::PartialPolicy;
use crate::mdp::{
    ActionDef, Condition, Effect, FactoredMdp, Literal, Outcome, RewardRule, State, Terminal, Value, Variable,
};
use crate::transforms::{Catalog, TransformKind, TransformSchema};

#[derive(Clone, Debug, PartialEq)]
pub struct TwoAgentParams {
    pub length: usize,
    /// Corridor cell the bay hangs off.
    pub bay_at: usize,
    /// 1 or 2.
    pub agents: usize,
    pub collisions: bool,
    pub step_cost: f64,
    pub goal_reward: f64,
    pub discount: f64,
}

impl Default for TwoAgentParams {
    fn default() -> Self {
        TwoAgentParams {
            length: 5,
            bay_at: 2,
            agents: 2,
            collisions: true,
            step_cost: 1.0,
            goal_reward: 10.0,
            discount: 0.95,
        }
    }
}

const MOVES: [&str; 5] = ["wait", "north", "south", "east", "west"];
const AGENTS: [&str; 2] = ["a", "b"];

impl TwoAgentParams {
    fn bay(&self) -> Value {
        self.length as Value
    }

    /// Destination of a move, `None` when the move is not possible from `cell`.
    fn dest(&self, cell: Value, mv: &str) -> Option<Value> {
        let last = self.length as Value - 1;
        let corridor = cell < self.bay();
        match mv {
            "wait" => Some(cell),
            "east" if corridor && cell < last => Some(cell + 1),
            "west" if corridor && cell > 0 => Some(cell - 1),
            "south" if cell == self.bay_at as Value => Some(self.bay()),
            "north" if cell == self.bay() => Some(self.bay_at as Value),
            _ => None,
        }
    }

    fn cells(&self) -> std::ops::Range<Value> {
        0..self.bay() + 1
    }

    fn goals(&self) -> Vec<Value> {
        let last = self.length as Value - 1;
        [last, 0][..self.agents].to_vec()
    }
}

/// The joint model and the anticipated policy of an observer who ignores collisions.
pub fn build_two_agent_grid(p: &TwoAgentParams) -> (FactoredMdp, PartialPolicy) {
    let model = build(p);
    let observer = build(&TwoAgentParams { collisions: false, ..p.clone() });
    let mut anticipated = PartialPolicy::new();
    for (s, a) in observer_path(&observer) {
        anticipated.insert(s, a);
    }
    (model, anticipated)
}

fn build(p: &TwoAgentParams) -> FactoredMdp {
    assert!((1..=2).contains(&p.agents), "one or two agents");
    let cell_names: Vec<String> = (0..p.length).map(|i| format!("c{i}")).chain(["bay".to_string()]).collect();
    let variables: Vec<Variable> = AGENTS[..p.agents].iter().map(|a| Variable::new(*a, cell_names.clone())).collect();

    let mut joint: Vec<Vec<&str>> = vec![vec![]];
    for _ in 0..p.agents {
        joint = joint
            .into_iter()
            .flat_map(|prefix| {
                MOVES.iter().map(move |m| {
                    let mut v = prefix.clone();
                    v.push(*m);
                    v
                })
            })
            .collect();
    }

    let mut actions = Vec::new();
    for moves in &joint {
        let mut effects = Vec::new();
        let mut literals = Vec::new();
        for (agent, mv) in moves.iter().enumerate() {
            if *mv == "wait" {
                continue;
            }
            let from: Vec<Value> = p.cells().filter(|&c| p.dest(c, mv).is_some()).collect();
            for &c in &from {
                effects.push(Effect::when(Condition::on(agent, [c]), agent, p.dest(c, mv).expect("filtered")));
            }
            literals.push(Literal::single(format!("{}-{mv}", AGENTS[agent]), agent, from));
        }
        let mut a = ActionDef::new(moves.join("-"), vec![Outcome::new(1.0, effects)]).in_schema("joint");
        for l in literals {
            a = a.requires(l);
        }
        if p.collisions && p.agents == 2 && moves.iter().any(|m| *m != "wait") {
            let stay = |c: Value, m: &str| p.dest(c, m).unwrap_or(c);
            let allowed: BTreeSet<Vec<Value>> = p
                .cells()
                .flat_map(|x| p.cells().map(move |y| (x, y)))
                .filter(|&(x, y)| {
                    let (dx, dy) = (stay(x, moves[0]), stay(y, moves[1]));
                    dx != dy && !(dx == y && dy == x)
                })
                .map(|(x, y)| vec![x, y])
                .collect();
            a = a.requires(Literal { label: "no-collision".into(), vars: vec![0, 1], allowed });
        }
        actions.push(a);
    }
    let home = Literal { label: "at-goals".into(), vars: (0..p.agents).collect(), allowed: [p.goals()].into() };
    actions.push(ActionDef::new("finish", vec![Outcome::new(1.0, vec![]).terminal(Terminal::Always)]).requires(home));

    let rewards =
        vec![RewardRule::new(-p.step_cost).for_action("joint"), RewardRule::new(p.goal_reward).for_action("finish")];
    let start: Vec<Value> = [0, p.length as Value - 1][..p.agents].to_vec();
    FactoredMdp::new("two-agent", variables, State::new(start), actions, rewards, p.discount)
        .expect("two-agent parameters are valid")
}

pub(crate) fn catalog() -> Catalog {
    let agent_literals = AGENTS.iter().flat_map(|a| MOVES[1..].iter().map(move |m| format!("{a}-{m}")));
    Catalog::new(vec![
        TransformSchema::new(TransformKind::PreconditionRelaxation).for_actions(["joint"]).for_literals(agent_literals),
        TransformSchema::new(TransformKind::PreconditionRelaxation)
            .for_actions(["joint"])
            .for_literals(["no-collision"]),
    ])
}
