//! Frozen lake: a grid with an icy rectangle. A move that starts on ice slips
//! with probability `slip`, which ends the episode. Claiming the goal pays 1.

use std::ops::Range;

use super::{observer_path, Grid, DIRECTIONS};
use crate::anticipation::PartialPolicy;
use crate::mdp::{ActionDef, Condition, FactoredMdp, Literal, Outcome, RewardRule, State, Terminal};
use crate::transforms::{Catalog, TransformKind, TransformSchema};

#[derive(Clone, Debug, PartialEq)]
pub struct FrozenLakeParams {
    pub rows: usize,
    pub cols: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub ice_rows: Range<usize>,
    pub ice_cols: Range<usize>,
    pub slip: f64,
    pub discount: f64,
}

impl Default for FrozenLakeParams {
    fn default() -> Self {
        FrozenLakeParams {
            rows: 3,
            cols: 4,
            start: (0, 0),
            goal: (0, 3),
            ice_rows: 0..2,
            ice_cols: 1..3,
            slip: 0.5,
            discount: 0.95,
        }
    }
}

pub fn build_frozen_lake(p: &FrozenLakeParams) -> FactoredMdp {
    let grid = Grid { rows: p.rows, cols: p.cols };
    let ice = Condition::on(0, p.ice_rows.clone().map(|r| r as u16)).and(1, p.ice_cols.clone().map(|c| c as u16));
    let mut actions = Vec::new();
    for (dir, dr, dc) in DIRECTIONS {
        let effects = grid.move_effects(dr, dc);
        let outcomes = if p.slip > 0.0 {
            vec![
                Outcome::new(1.0 - p.slip, effects.clone()),
                Outcome::new(p.slip, effects).terminal(Terminal::When(ice.clone())),
            ]
        } else {
            vec![Outcome::new(1.0, effects)]
        };
        actions.push(
            ActionDef::new(format!("move-{dir}"), outcomes).in_schema("move").requires(grid.edge_literal(dir, dr, dc)),
        );
    }
    actions.push(goal_action("claim", "at-goal", p.goal));
    let rewards = vec![RewardRule::new(1.0).for_action("claim")];
    let start = State::new(vec![p.start.0 as u16, p.start.1 as u16]);
    FactoredMdp::new("frozen-lake", grid.variables(), start, actions, rewards, p.discount)
        .expect("frozen lake parameters are valid")
}

/// Terminal action applicable only in `cell`.
pub(crate) fn goal_action(name: &str, label: &str, cell: (usize, usize)) -> ActionDef {
    let at =
        Literal { label: label.to_string(), vars: vec![0, 1], allowed: [vec![cell.0 as u16, cell.1 as u16]].into() };
    ActionDef::new(name, vec![Outcome::new(1.0, vec![]).terminal(Terminal::Always)]).requires(at)
}

/// The observer does not know about slipping: its plan crosses the ice.
pub fn frozen_lake_anticipated(p: &FrozenLakeParams) -> PartialPolicy {
    let observer = build_frozen_lake(&FrozenLakeParams { slip: 0.0, ..p.clone() });
    let mut out = PartialPolicy::new();
    for (s, a) in observer_path(&observer) {
        out.insert(s, a);
    }
    out
}

pub(crate) fn catalog() -> Catalog {
    Catalog::new(vec![
        TransformSchema::new(TransformKind::PreconditionRelaxation).for_actions(["move"]),
        TransformSchema::new(TransformKind::SingleOutcomeDeterminization),
        TransformSchema::new(TransformKind::AllOutcomeDeterminization),
    ])
}
