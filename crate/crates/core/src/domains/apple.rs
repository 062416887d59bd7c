//! Apple picking: walk to the apple and pick it. A thorny wall separates the first
//! two rows over some columns; a move starting next to it ends the episode with
//! probability `q`.

use std::collections::BTreeSet;
use std::ops::Range;

use super::frozen_lake::goal_action;
use super::{observer_path, Grid, DIRECTIONS};
use crate::anticipation::PartialPolicy;
use crate::mdp::{ActionDef, Condition, FactoredMdp, Literal, Outcome, RewardRule, State, Terminal};
use crate::transforms::{Catalog, TransformKind, TransformSchema};

#[derive(Clone, Debug, PartialEq)]
pub struct AppleParams {
    pub rows: usize,
    pub cols: usize,
    pub start: (usize, usize),
    pub apple: (usize, usize),
    /// The thorny wall runs between rows 0 and 1 over these columns.
    pub thorn_cols: Range<usize>,
    pub q: f64,
    pub discount: f64,
}

impl Default for AppleParams {
    fn default() -> Self {
        AppleParams { rows: 3, cols: 5, start: (0, 0), apple: (0, 4), thorn_cols: 1..4, q: 0.3, discount: 0.95 }
    }
}

pub fn build_apple_picking(p: &AppleParams) -> FactoredMdp {
    let grid = Grid { rows: p.rows, cols: p.cols };
    let thorns: Vec<u16> = p.thorn_cols.clone().map(|c| c as u16).collect();
    let near = Condition::on(0, [0, 1]).and(1, thorns.iter().copied());
    let cells = || (0..p.rows as u16).flat_map(|r| (0..p.cols as u16).map(move |c| vec![r, c]));
    let mut actions = Vec::new();
    for (dir, dr, dc) in DIRECTIONS {
        let effects = grid.move_effects(dr, dc);
        let outcomes = if p.q > 0.0 {
            vec![
                Outcome::new(1.0 - p.q, effects.clone()),
                Outcome::new(p.q, effects).terminal(Terminal::When(near.clone())),
            ]
        } else {
            vec![Outcome::new(1.0, effects)]
        };
        let mut a =
            ActionDef::new(format!("move-{dir}"), outcomes).in_schema("move").requires(grid.edge_literal(dir, dr, dc));
        let blocked_row = match dir {
            "south" => Some(0),
            "north" => Some(1),
            _ => None,
        };
        if let Some(row) = blocked_row {
            let allowed: BTreeSet<Vec<u16>> = cells().filter(|rc| !(rc[0] == row && thorns.contains(&rc[1]))).collect();
            a = a.requires(Literal { label: format!("no-thorns-{dir}"), vars: vec![0, 1], allowed });
        }
        actions.push(a);
    }
    actions.push(goal_action("pick", "at-apple", p.apple));
    let rewards = vec![RewardRule::new(1.0).for_action("pick")];
    let start = State::new(vec![p.start.0 as u16, p.start.1 as u16]);
    FactoredMdp::new("apple-picking", grid.variables(), start, actions, rewards, p.discount)
        .expect("apple picking parameters are valid")
}

/// The observer ignores the thorns and walks along them.
pub fn apple_anticipated(p: &AppleParams) -> PartialPolicy {
    let observer = build_apple_picking(&AppleParams { q: 0.0, ..p.clone() });
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
