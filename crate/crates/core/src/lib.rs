//! Explaining the gap between a reinforcement-learning agent's policy and an
//! observer's anticipated policy.
//!
//! An explanation is a shortest sequence of formal model transforms (precondition
//! relaxation, determinization, feature projection, ...) after which the retrained
//! agent behaves as the observer expected. The crate provides factored MDPs
//! ([`mdp`]), the transform algebra ([`transforms`]), tabular actors ([`solvers`]),
//! the satisfaction check ([`anticipation`]), the search strategies ([`search`]),
//! benchmark fixtures ([`domains`]) and report serialization ([`report`]).

pub mod anticipation;
pub mod domains;
pub mod error;
pub mod mdp;
pub mod report;
pub mod search;
pub mod solvers;
pub mod transforms;

pub use anticipation::{PartialPolicy, SatisfactionReport};
pub use error::{Error, Result};
pub use mdp::{FactoredMdp, State, TabularMdp};
pub use search::{Explanation, RlpeInstance, Strategy};
pub use solvers::{GreedyPolicy, QTable, SolverConfig, SolverKind};
pub use transforms::{Catalog, GroundedTransform, TransformKind, TransformSchema, TransformSequence};
