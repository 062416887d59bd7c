use super::*;
use crate::domains;
use crate::transforms::TransformKind;

fn relax(action: &str, literal: &str) -> GroundedTransform {
    GroundedTransform::PreconditionRelaxation {
        action: action.into(),
        literal: literal.into(),
        features: vec!["taxi".into()],
    }
}

fn instance(name: &str) -> RlpeInstance {
    RlpeInstance::from_fixture(domains::fixture(name).unwrap())
}

fn ids(e: &Explanation) -> Vec<String> {
    e.sequence.transforms.iter().map(GroundedTransform::id).collect()
}

#[test]
fn disjoint_relaxations_share_a_key() {
    let a = relax("move", "no-wall-east");
    let b = relax("move", "no-wall-west");
    let ab = TransformSequence::new(vec![a.clone(), b.clone()]);
    let ba = TransformSequence::new(vec![b, a]);
    assert_eq!(dedup_key(&ab), dedup_key(&ba));
    assert!(matches!(dedup_key(&ab), DedupKey::Set(_)));
}

#[test]
fn overlapping_transforms_keep_order() {
    let m = domains::fixture("taxi-fuel").unwrap().model;
    let literal = m.action("move-north").unwrap().preconditions[0].clone();
    let r = relax("move", &literal.label);
    let add = GroundedTransform::PreconditionAddition { action: "move".into(), literal, features: vec!["taxi".into()] };
    let ra = TransformSequence::new(vec![r.clone(), add.clone()]);
    let ar = TransformSequence::new(vec![add, r]);
    assert_ne!(dedup_key(&ra), dedup_key(&ar));
    assert!(matches!(dedup_key(&ra), DedupKey::Ordered(_)));
}

#[test]
fn duplicates_collapse() {
    let a = relax("move", "no-wall-east");
    let once = TransformSequence::new(vec![a.clone()]);
    let twice = TransformSequence::new(vec![a.clone(), a]);
    assert_eq!(dedup_key(&once), dedup_key(&twice));
}

#[test]
fn satisfied_root_returns_empty_sequence() {
    let e = instance("twocell").solve(Strategy::Base).unwrap();
    assert!(e.satisfied() && e.sequence.is_empty());
    assert_eq!(e.distance, 0);
    assert_eq!(e.stats.nodes_expanded, 1);
    assert_eq!(e.termination, Termination::Satisfied);
}

#[test]
fn empty_catalog_reports_root_ratio() {
    let mut inst = instance("taxi-fuel");
    inst.catalog.clear();
    let e = inst.solve(Strategy::Base).unwrap();
    assert!(!e.satisfied());
    assert_eq!(e.termination, Termination::Exhausted);
    assert!(e.sequence.is_empty());
    assert_eq!(e.stats.nodes_expanded, 1);
    assert!(e.report.ratio < 1.0);
}

#[test]
fn zero_timeout_evaluates_only_the_root() {
    let inst = instance("taxi-fuel").with_timeout(Duration::ZERO);
    let e = inst.solve(Strategy::Base).unwrap();
    assert_eq!(e.termination, Termination::Timeout);
    assert_eq!(e.stats.nodes_expanded, 1);
    let mut root = instance("taxi-fuel");
    root.catalog.clear();
    assert_eq!(e.report, root.solve(Strategy::Base).unwrap().report);
}

#[test]
fn taxi_fuel_relaxation_is_the_explanation() {
    for s in Strategy::ALL {
        let e = instance("taxi-fuel").solve(s).unwrap();
        assert_eq!(ids(&e), ["precondition-relaxation(move,fuel>0)"], "{s}");
        assert_eq!(e.distance, 1);
        assert_eq!(e.report.ratio, 1.0);
        assert_eq!(e.heuristic, s == Strategy::Precluster);
    }
}

#[test]
fn popped_distances_never_decrease() {
    let mut inst = instance("taxi-fuel");
    inst.catalog.retain(|s| s.kind == TransformKind::PreconditionRelaxation);
    inst.catalog[0] = inst.catalog[0].clone().for_literals(["no-wall-east", "no-wall-west", "no-north-edge"]);
    let e = inst.with_depth(3).solve(Strategy::Base).unwrap();
    assert!(!e.satisfied());
    assert_eq!(e.termination, Termination::Exhausted);
    let d: Vec<u32> = e.trace.iter().map(|t| t.distance).collect();
    assert!(d.windows(2).all(|w| w[0] <= w[1]), "{d:?}");
    // three commuting relaxations: 1 + 3 + 3 + 1 distinct subsets
    assert_eq!(e.stats.nodes_expanded, 8);
    assert_eq!(e.stats.max_sequence_length, 3);
}

#[test]
fn depth_limit_caps_sequence_length() {
    let mut inst = instance("taxi-fuel");
    inst.catalog.retain(|s| s.kind == TransformKind::PreconditionRelaxation);
    inst.catalog[0] =
        inst.catalog[0].clone().for_literals(["no-wall-east", "no-wall-west", "no-north-edge", "no-south-edge"]);
    for depth in 1..=3 {
        let e = inst.clone().with_depth(depth).solve(Strategy::Base).unwrap();
        assert!(e.trace.iter().all(|t| t.sequence.len() <= depth));
        assert_eq!(e.stats.max_sequence_length, depth);
    }
    assert!(inst.with_depth(0).solve(Strategy::Base).is_err());
}

#[test]
fn identity_child_needs_no_training() {
    let root = instance("taxi-fuel");
    let cfg = root.actor.clone();
    let m = root.model.clone();
    let q = crate::solvers::value_iteration(&m, &cfg).unwrap();
    let applied = GroundedTransform::identity().apply_with_mappings(&m).unwrap();
    let tab = std::sync::Arc::new(crate::mdp::TabularMdp::compile(&applied.model).unwrap());
    let affected = crate::solvers::affected_states(q.tabular(), &tab, &applied.phi);
    assert!(affected.is_empty());
    let warm = crate::solvers::warm_start(&q, &m, &applied.phi, &applied.psi, tab).unwrap();
    let updated = crate::solvers::focused_update(warm, &affected, &cfg);
    assert_eq!(updated.steps(), 0);
    let before = crate::anticipation::satisfies(
        &crate::solvers::extract_policy(&q),
        &root.anticipated,
        &applied.phi,
        &applied.psi,
    );
    let after = crate::anticipation::satisfies(
        &crate::solvers::extract_policy(&updated),
        &root.anticipated,
        &applied.phi,
        &applied.psi,
    );
    assert_eq!(before, after);
}

#[test]
fn pretrain_samples_fewer_steps_on_taxi() {
    let base = instance("taxi-fuel").solve(Strategy::Base).unwrap();
    let pre = instance("taxi-fuel").solve(Strategy::Pretrain).unwrap();
    assert_eq!(base.sequence, pre.sequence);
    assert!(pre.stats.solver_steps < base.stats.solver_steps);
}

#[test]
fn wall_compound_is_pruned_on_taxi() {
    let e = instance("taxi-fuel").solve(Strategy::Precluster).unwrap();
    assert_eq!(e.stats.compound_probes, 1);
    assert_eq!(e.stats.pruned, 6);
    assert!(e.trace.iter().filter(|t| !t.compound).all(|t| t.sequence.len() <= 1));
}

/// `go` needs both keys; only the first is missing.
fn two_keys() -> RlpeInstance {
    use crate::anticipation::PartialPolicy;
    use crate::mdp::{ActionDef, Effect, Literal, Outcome, RewardRule, State, Terminal, Variable};
    let vars = vec![
        Variable::new("at", ["door", "out"]),
        Variable::boolean("k1").with_feature("key"),
        Variable::boolean("k2").with_feature("key"),
    ];
    let go = ActionDef::new("go", vec![Outcome::new(1.0, vec![Effect::set(0, 1)]).terminal(Terminal::Always)])
        .requires(Literal::single("has-k1", 1, [1]))
        .requires(Literal::single("has-k2", 2, [1]));
    let wait = ActionDef::new("wait", vec![Outcome::new(1.0, vec![])]);
    let model = FactoredMdp::new(
        "two-keys",
        vars,
        State::new(vec![0, 0, 1]),
        vec![go, wait],
        vec![RewardRule::new(10.0).for_action("go")],
        0.9,
    )
    .unwrap();
    let mut anticipated = PartialPolicy::new();
    anticipated.insert(model.initial_state(), "go");
    RlpeInstance::new(model, anticipated, vec![TransformSchema::new(TransformKind::PreconditionRelaxation)])
}

#[test]
fn improving_compound_expands_members() {
    let e = two_keys().solve(Strategy::Precluster).unwrap();
    assert!(e.satisfied());
    assert_eq!(ids(&e), ["precondition-relaxation(go,has-k1)"]);
    assert_eq!(e.stats.compound_probes, 1);
    assert_eq!(e.stats.pruned, 0);
    assert_eq!(e.trace[1].sequence.len(), 2);
    assert!(e.trace[1].compound && e.trace[1].ratio == 1.0);
}

#[test]
fn singleton_families_are_not_probed() {
    let mut inst = two_keys();
    inst.catalog[0] = inst.catalog[0].clone().for_literals(["has-k1"]);
    let e = inst.solve(Strategy::Precluster).unwrap();
    assert!(e.satisfied());
    assert_eq!(e.stats.compound_probes, 0);
    assert_eq!(e.stats.nodes_expanded, 2);
}

#[test]
fn parallel_matches_serial() {
    for name in domains::SUITE_NAMES {
        for s in Strategy::ALL {
            let serial = instance(name).solve(s).unwrap();
            let parallel = instance(name).with_workers(4).solve(s).unwrap();
            assert_eq!(serial, parallel, "{name} {s}");
        }
    }
}

#[test]
fn strategy_names_parse() {
    for s in Strategy::ALL {
        assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
    }
    assert!("astar".parse::<Strategy>().is_err());
}
