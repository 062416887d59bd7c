//! Seeded random models and RLPE instances for property tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anticipation::PartialPolicy;
use crate::mdp::{
    ActionDef, Atom, Condition, Effect, FactoredMdp, Literal, Outcome, RewardRule, State, Value, Variable,
};
use crate::solvers::{extract_policy, value_iteration, SolverConfig};
use crate::transforms::{ground, ground_catalog, Catalog, TransformKind, TransformSchema, TransformSequence};

fn factor(mut n: usize) -> Vec<usize> {
    if n <= 1 {
        return vec![1];
    }
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        while n.is_multiple_of(d) {
            out.push(d);
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn decode(mut idx: usize, sizes: &[usize]) -> Vec<Value> {
    let mut out = vec![0; sizes.len()];
    for (i, &size) in sizes.iter().enumerate().rev() {
        out[i] = (idx % size) as Value;
        idx /= size;
    }
    out
}

fn exactly(values: &[Value]) -> Condition {
    Condition::new(values.iter().enumerate().map(|(var, &v)| Atom { var, values: [v].into() }).collect())
}

/// A model with `n_states` states factored over variables whose domain sizes are
/// the prime factors of `n_states`. Every action has `branching` outcomes with
/// fixed probabilities; each outcome sends each state to its own successor.
/// Outcome 0 of action 0 walks a random cycle through all states, so the model
/// is connected. Rewards are in `[0, 1)`.
pub fn random_mdp(seed: u64, n_states: usize, n_actions: usize, branching: usize) -> FactoredMdp {
    assert!(n_states >= 1 && n_actions >= 1 && branching >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = factor(n_states);
    let variables: Vec<Variable> = sizes
        .iter()
        .enumerate()
        .map(|(i, &k)| Variable::new(format!("x{i}"), (0..k).map(|v| format!("v{v}"))))
        .collect();
    let states: Vec<Vec<Value>> = (0..n_states).map(|i| decode(i, &sizes)).collect();

    let mut order: Vec<usize> = (1..n_states).collect();
    order.shuffle(&mut rng);
    order.insert(0, 0);
    let mut cycle = vec![0; n_states];
    for i in 0..n_states {
        cycle[order[i]] = order[(i + 1) % n_states];
    }

    let mut actions = Vec::new();
    let mut rewards = Vec::new();
    for j in 0..n_actions {
        let weights: Vec<f64> = (0..branching).map(|_| rng.gen_range(0.2..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let head: f64 = probs[..branching - 1].iter().sum();
        probs[branching - 1] = 1.0 - head;
        let mut outcomes = Vec::new();
        for (o, &p) in probs.iter().enumerate() {
            let mut effects = Vec::new();
            for (s, values) in states.iter().enumerate() {
                let succ = if j == 0 && o == 0 { cycle[s] } else { rng.gen_range(0..n_states) };
                for (var, (&from, &to)) in values.iter().zip(&states[succ]).enumerate() {
                    if from != to {
                        effects.push(Effect::when(exactly(values), var, to));
                    }
                }
            }
            outcomes.push(Outcome::new(p, effects));
        }
        let name = format!("a{j}");
        for values in &states {
            let r: f64 = rng.gen_range(0.0..1.0);
            rewards.push(RewardRule::new((r * 1000.0).round() / 1000.0).for_action(name.clone()).from(exactly(values)));
        }
        actions.push(ActionDef::new(name, outcomes));
    }
    FactoredMdp::new(format!("random-{seed}"), variables, State::new(states[0].clone()), actions, rewards, 0.9)
        .expect("generated model is valid")
}

/// A random RLPE problem with a planted solution.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub model: FactoredMdp,
    pub anticipated: PartialPolicy,
    pub catalog: Catalog,
    /// Sequence whose retrained policy the anticipated policy was read from.
    pub planted: TransformSequence,
}

/// Builds a small model with one guarded action, a catalog grounding to at most
/// six transforms on it, and an anticipated policy read off the value-iteration
/// policy of a randomly chosen transform sequence of length 0 to 2.
pub fn random_instance(seed: u64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let n_states = *[4, 6, 8, 9, 12].choose(&mut rng).expect("non-empty");
    let n_actions = rng.gen_range(2..=3);
    let base = random_mdp(seed, n_states, n_actions, 2);

    let domain = base.variables()[0].domain.len() as Value;
    let mut guard: Vec<Value> = (0..domain).filter(|_| rng.gen_bool(0.5)).collect();
    if guard.is_empty() || guard.len() == domain as usize {
        guard = vec![0];
    }
    let mut actions = base.actions().to_vec();
    let last = actions.len() - 1;
    actions[last].preconditions.push(Literal::single("guard", 0, guard));
    let model = FactoredMdp::new(
        base.name(),
        base.variables().to_vec(),
        base.full_initial_state().clone(),
        actions,
        base.rewards().to_vec(),
        base.discount(),
    )
    .expect("guarded model is valid");

    let features: Vec<String> = model.features().iter().map(|f| f.to_string()).collect();
    let mut candidates = vec![
        TransformSchema::new(TransformKind::SingleOutcomeDeterminization),
        TransformSchema::new(TransformKind::AllOutcomeDeterminization),
        TransformSchema::new(TransformKind::PreconditionRelaxation),
        TransformSchema::new(TransformKind::StateSpaceReduction)
            .for_features([features.choose(&mut rng).expect("has features").clone()]),
    ];
    candidates.shuffle(&mut rng);
    let mut schemas = Vec::new();
    let mut grounded = 0;
    for s in candidates {
        let n = ground(&s, &model).len();
        if n > 0 && grounded + n <= 6 {
            grounded += n;
            schemas.push(s);
        }
    }
    let catalog = Catalog::new(schemas);

    let mut planted = TransformSequence::default();
    let mut current = model.clone();
    for _ in 0..rng.gen_range(0..=2) {
        let options = ground_catalog(&catalog.schemas, &current);
        let Some(t) = options.choose(&mut rng) else { break };
        current = t.apply(&current).expect("freshly grounded");
        planted = planted.then(t.clone());
    }
    let applied = planted.apply(&model).expect("planted sequence applies");
    let q = value_iteration(&applied.model, &SolverConfig::default()).expect("small model");
    let pi = extract_policy(&q);
    let mut anticipated = PartialPolicy::new();
    for s in model.enumerate_reachable().expect("small model") {
        if s != model.initial_state() && rng.gen_bool(0.5) {
            continue;
        }
        let Some(b) = pi.action_at(&applied.phi.map(&s)) else {
            continue;
        };
        if let Some(a) = model.action_names().find(|a| applied.psi.family(a).contains(b)) {
            anticipated.insert(s, a);
        }
    }
    RandomInstance { model, anticipated, catalog, planted }
}
