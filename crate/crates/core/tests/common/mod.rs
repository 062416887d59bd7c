//! Brute-force oracles and the library-level acceptance checks built on them.
//! Shared by this crate's integration tests and the CLI acceptance target.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::time::{Duration, Instant};

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rlpe::anticipation::satisfies;
use rlpe::domains::{self, TaxiParams};
use rlpe::mdp::{Value, HIDDEN};
use rlpe::search::{RlpeInstance, Strategy};
use rlpe::solvers::{extract_policy, solve, SolverConfig};
use rlpe::transforms::{ground_catalog, GroundedTransform, TransformKind, TransformSchema, TransformSequence};
use rlpe::{FactoredMdp, PartialPolicy, State};

/// Outcome of one acceptance criterion.
pub struct Check {
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Check { passed, detail: detail.into() }
    }

    pub fn line(&self, n: usize) -> String {
        format!("criterion {n}: {} ({})", if self.passed { "PASS" } else { "FAIL" }, self.detail)
    }
}

// ---------------------------------------------------------------------------
// oracles

/// Every assignment of the model's variables.
pub fn all_states(m: &FactoredMdp) -> Vec<State> {
    let mut out = vec![Vec::new()];
    for v in m.variables() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Value>| {
                (0..v.domain.len() as Value).map(move |x| {
                    let mut s = prefix.clone();
                    s.push(x);
                    s
                })
            })
            .collect();
    }
    out.into_iter().map(State::new).collect()
}

fn hide(s: &State, hidden: &BTreeSet<usize>) -> State {
    State::new(s.values().iter().enumerate().map(|(i, &v)| if hidden.contains(&i) { HIDDEN } else { v }).collect())
}

/// Feature projection by double sum over the full states of `m`, uniform weights:
/// `P̄(s̄,a,s̄') = Σ_{s∈φ⁻¹(s̄)} w(s) Σ_{s'∈φ⁻¹(s̄')} P(s,a,s')` and
/// `R̄(s̄,a) = Σ_{s∈φ⁻¹(s̄)} w(s) R(s,a)`. Terminal mass is keyed separately.
pub fn abstract_row(
    m: &FactoredMdp,
    hidden: &BTreeSet<usize>,
    s_bar: &State,
    action: &str,
) -> (BTreeMap<(State, bool), f64>, f64) {
    let members: Vec<State> = all_states(m).into_iter().filter(|s| hide(s, hidden) == *s_bar).collect();
    let w = 1.0 / members.len() as f64;
    let mut p = BTreeMap::new();
    let mut r = 0.0;
    for s in &members {
        match m.transition(s, action) {
            Ok(succ) => {
                for b in succ {
                    r += w * b.probability * m.reward(s, action, &b.state).unwrap();
                    *p.entry((hide(&b.state, hidden), b.terminal)).or_insert(0.0) += w * b.probability;
                }
            }
            Err(_) => *p.entry((s_bar.clone(), false)).or_insert(0.0) += w,
        }
    }
    (p, r)
}

fn reachable(m: &FactoredMdp) -> Vec<State> {
    let start = m.initial_state();
    let mut seen = HashSet::from([start.clone()]);
    let mut order = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for a in m.applicable_actions(&s).unwrap() {
            for b in m.transition(&s, a).unwrap() {
                if !b.terminal && seen.insert(b.state.clone()) {
                    order.push(b.state.clone());
                    queue.push_back(b.state);
                }
            }
        }
    }
    order
}

/// Per action: (successor or `None` when terminal, probability, reward).
type Branches = Vec<(Option<State>, f64, f64)>;

/// Optimal state values by plain synchronous value iteration over the model's
/// query interface.
pub fn oracle_values(m: &FactoredMdp) -> HashMap<State, f64> {
    let states = reachable(m);
    let gamma = m.discount();
    let mut rows: Vec<Vec<Branches>> = Vec::new();
    for s in &states {
        let mut row = Vec::new();
        for a in m.applicable_actions(s).unwrap() {
            let branches = m
                .transition(s, a)
                .unwrap()
                .into_iter()
                .map(|b| {
                    let r = m.reward(s, a, &b.state).unwrap();
                    ((!b.terminal).then_some(b.state), b.probability, r)
                })
                .collect();
            row.push(branches);
        }
        rows.push(row);
    }
    let mut v: HashMap<State, f64> = states.iter().map(|s| (s.clone(), 0.0)).collect();
    for _ in 0..200_000 {
        let mut next = HashMap::new();
        let mut delta: f64 = 0.0;
        for (s, row) in states.iter().zip(&rows) {
            let best = row
                .iter()
                .map(|branches| {
                    branches.iter().map(|(n, p, r)| p * (r + n.as_ref().map_or(0.0, |n| gamma * v[n]))).sum::<f64>()
                })
                .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
                .unwrap_or(0.0);
            delta = delta.max((best - v[s]).abs());
            next.insert(s.clone(), best);
        }
        v = next;
        if delta < 1e-13 {
            break;
        }
    }
    v
}

/// Satisfaction checked directly: `hidden` is the transformed model's projected
/// variable set, `policy` the actor's choices keyed by transformed state, and
/// an action's family is every transformed action whose origin it is.
pub fn brute_satisfaction(
    policy: &HashMap<State, String>,
    transformed: &FactoredMdp,
    anticipated: &PartialPolicy,
) -> (bool, f64, BTreeSet<State>) {
    let hidden = transformed.hidden();
    let mut bad = BTreeSet::new();
    for (s, a) in anticipated.entries() {
        let ok = policy
            .get(&hide(s, hidden))
            .is_some_and(|chosen| transformed.actions().iter().any(|b| b.origin == a && b.name == *chosen));
        if !ok {
            bad.insert(s.clone());
        }
    }
    let total = anticipated.len();
    let ratio = if total == 0 { 1.0 } else { (total - bad.len()) as f64 / total as f64 };
    (bad.is_empty(), ratio, bad)
}

/// Shortest satisfying sequence length by trying every sequence up to `depth`.
pub fn exhaustive_min(inst: &RlpeInstance) -> Option<usize> {
    let mut level = vec![TransformSequence::default()];
    for len in 0..=inst.depth {
        let mut next = Vec::new();
        for seq in &level {
            let applied = seq.apply(&inst.model).unwrap();
            let q = solve(&applied.model, &inst.actor).unwrap();
            if satisfies(&extract_policy(&q), &inst.anticipated, &applied.phi, &applied.psi).satisfied {
                return Some(len);
            }
            for t in ground_catalog(&inst.catalog, &applied.model) {
                next.push(seq.then(t));
            }
        }
        level = next;
    }
    None
}

/// Reachable taxi states by direct simulation of the rules.
pub fn taxi_reachable(p: &TaxiParams, fuel_blocks_moves: bool) -> usize {
    type S = (usize, usize, bool, usize);
    let start: S = (p.start.0, p.start.1, false, p.initial_fuel);
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some((r, c, riding, fuel)) = queue.pop_front() {
        let mut next: Vec<S> = Vec::new();
        if fuel > 0 || !fuel_blocks_moves {
            let after = fuel.saturating_sub(1);
            if r > 0 {
                next.push((r - 1, c, riding, after));
            }
            if r + 1 < p.rows {
                next.push((r + 1, c, riding, after));
            }
            if c + 1 < p.cols && !p.walls.contains(&(r, c)) {
                next.push((r, c + 1, riding, after));
            }
            if c > 0 && !p.walls.contains(&(r, c - 1)) {
                next.push((r, c - 1, riding, after));
            }
        }
        if (r, c) == p.passenger && !riding {
            next.push((r, c, true, fuel));
        }
        if (r, c) == p.station {
            next.push((r, c, riding, p.fuel_capacity));
        }
        for s in next {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    seen.len()
}

fn policy_map(q: &rlpe::QTable) -> HashMap<State, String> {
    extract_policy(q).iter().map(|(s, a)| (s.clone(), a.to_string())).collect()
}

// ---------------------------------------------------------------------------
// criteria

const C1_TOL: f64 = 1e-9;
const C2_V_TOL: f64 = 1e-4;
const C2_DET_TOL: f64 = 1e-6;
const C2_DOM_TOL: f64 = 1e-6;
const C5_CLUSTER_FACTOR: f64 = 0.8;
pub const SUITE_SEEDS: [u64; 3] = [0, 1, 2];

/// Projection correctness on 50 random models with random feature projections.
pub fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rows = 0;
    for seed in 0..50u64 {
        let n = rng.gen_range(1..=30);
        let m = domains::random_mdp(seed, n, rng.gen_range(1..=3), rng.gen_range(1..=3));
        let vars = m.variables().len();
        let k = rng.gen_range(1..=vars);
        let hidden: BTreeSet<usize> = (0..vars).choose_multiple(&mut rng, k).into_iter().collect();
        let features = hidden.iter().map(|&v| m.variables()[v].feature_name().to_string()).collect();
        let t = GroundedTransform::StateSpaceReduction { features };
        let abs = t.apply(&m).unwrap();
        let targets: BTreeSet<State> = all_states(&m).iter().map(|s| hide(s, &hidden)).collect();
        for s_bar in &targets {
            for a in m.action_names() {
                let (p, r) = abstract_row(&m, &hidden, s_bar, a);
                let got = abs.transition(s_bar, a).unwrap();
                let sum: f64 = got.iter().map(|b| b.probability).sum();
                if (sum - 1.0).abs() > C1_TOL {
                    return Check::new(false, format!("seed {seed}: row sums to {sum}"));
                }
                let mut merged: BTreeMap<(State, bool), f64> = BTreeMap::new();
                for b in got {
                    *merged.entry((b.state, b.terminal)).or_insert(0.0) += b.probability;
                }
                let keys: BTreeSet<_> = merged.keys().chain(p.keys()).cloned().collect();
                for key in keys {
                    let (x, y) = (merged.get(&key).copied().unwrap_or(0.0), p.get(&key).copied().unwrap_or(0.0));
                    if (x - y).abs() > C1_TOL {
                        return Check::new(false, format!("seed {seed}: P̄ {x} vs oracle {y}"));
                    }
                }
                let got_r = abs.expected_reward(s_bar, a).unwrap();
                if (got_r - r).abs() > C1_TOL {
                    return Check::new(false, format!("seed {seed}: R̄ {got_r} vs oracle {r}"));
                }
                rows += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    Check::new(
        elapsed < Duration::from_secs(10),
        format!("50 models, {rows} abstract rows within {C1_TOL:e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

/// TwoCell values and all-outcome dominance on 100 random models.
pub fn criterion_2() -> Check {
    let m = domains::build_twocell();
    let l = m.initial_state();
    let v = oracle_values(&m)[&l];
    let lib = solve(&m, &SolverConfig::default()).unwrap().value(&l).unwrap();
    let expected = 0.8 / 0.82;
    if (v - expected).abs() > C2_V_TOL || (lib - v).abs() > C2_V_TOL {
        return Check::new(false, format!("V*(L) oracle {v}, library {lib}"));
    }
    let det = GroundedTransform::SingleOutcomeDeterminization { action: "go".into() }.apply(&m).unwrap();
    let vd = oracle_values(&det)[&l];
    let libd = solve(&det, &SolverConfig::default()).unwrap().value(&l).unwrap();
    if (vd - 1.0).abs() > C2_DET_TOL || (libd - 1.0).abs() > C2_DET_TOL {
        return Check::new(false, format!("determinized V*(L) oracle {vd}, library {libd}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for seed in 0..100u64 {
        let m = domains::random_mdp(1000 + seed, rng.gen_range(1..=20), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let mut aod = m.clone();
        for a in m.action_names().filter(|a| m.action(a).unwrap().is_stochastic()) {
            aod = GroundedTransform::AllOutcomeDeterminization { action: a.to_string() }.apply(&aod).unwrap();
        }
        let before = oracle_values(&m);
        let after = oracle_values(&aod);
        for (s, x) in &before {
            if after[s] < x - C2_DOM_TOL {
                return Check::new(false, format!("seed {seed}: V' {} < V {x}", after[s]));
            }
        }
    }
    Check::new(true, format!("V*(L)={v:.5}, determinized {vd:.6}, dominance on 100 models"))
}

/// The Fig.-1 narrative on the taxi-fuel fixture.
pub fn criterion_3() -> Check {
    let start = Instant::now();
    let inst = RlpeInstance::from_fixture(domains::fixture("taxi-fuel").unwrap());
    let e = inst.solve(Strategy::Base).unwrap();
    let ids: Vec<String> = e.sequence.transforms.iter().map(|t| t.id()).collect();
    if ids != ["precondition-relaxation(move,fuel>0)"] || e.distance != 1 || e.report.ratio != 1.0 {
        return Check::new(false, format!("got {ids:?}, distance {}, ratio {}", e.distance, e.report.ratio));
    }
    let wall = |literal: &str| GroundedTransform::PreconditionRelaxation {
        action: "move".into(),
        literal: literal.into(),
        features: vec!["taxi".into()],
    };
    let mut worst: f64 = 0.0;
    for seq in
        [vec![wall("no-wall-east")], vec![wall("no-wall-west")], vec![wall("no-wall-east"), wall("no-wall-west")]]
    {
        let applied = TransformSequence::new(seq).apply(&inst.model).unwrap();
        let q = solve(&applied.model, &inst.actor).unwrap();
        let ratio = satisfies(&extract_policy(&q), &inst.anticipated, &applied.phi, &applied.psi).ratio;
        worst = worst.max(ratio);
    }
    let elapsed = start.elapsed();
    Check::new(
        worst < 1.0 && elapsed < Duration::from_secs(60),
        format!("[relax(move,fuel>0)] at distance 1, wall branches reach {worst:.2}, {:.2}s", elapsed.as_secs_f64()),
    )
}

/// BASE distance equals the exhaustive minimum on 20 random instances.
pub fn criterion_4() -> Check {
    let mut solved = 0;
    for seed in 0..20u64 {
        let ri = domains::random_instance(seed);
        let inst = RlpeInstance::new(ri.model, ri.anticipated, ri.catalog.schemas).with_depth(2);
        let e = inst.solve(Strategy::Base).unwrap();
        let oracle = exhaustive_min(&inst);
        let got = e.satisfied().then_some(e.sequence.len());
        if got != oracle || (e.satisfied() && e.distance as usize != e.sequence.len()) {
            return Check::new(false, format!("seed {seed}: search {got:?}, exhaustive {oracle:?}"));
        }
        solved += usize::from(oracle.is_some());
    }
    Check::new(true, format!("20 instances agree, {solved} solvable"))
}

pub struct SuiteRow {
    pub domain: &'static str,
    pub strategy: Strategy,
    pub seed: u64,
    pub ratio: f64,
    pub nodes: u64,
    pub steps: u64,
}

pub fn run_suite() -> Vec<SuiteRow> {
    let mut rows = Vec::new();
    for domain in domains::SUITE_NAMES {
        for seed in SUITE_SEEDS {
            for strategy in Strategy::ALL {
                let inst = RlpeInstance::from_fixture(domains::fixture(domain).unwrap())
                    .with_actor(SolverConfig::default().with_seed(seed));
                let e = inst.solve(strategy).unwrap();
                rows.push(SuiteRow {
                    domain,
                    strategy,
                    seed,
                    ratio: e.report.ratio,
                    nodes: e.stats.nodes_expanded,
                    steps: e.stats.solver_steps,
                });
            }
        }
    }
    rows
}

/// Strategy ordering over the fixture suite.
pub fn criterion_5() -> Check {
    let rows = run_suite();
    let mean = |d: &str, s: Strategy, f: fn(&SuiteRow) -> f64| {
        let xs: Vec<f64> = rows.iter().filter(|r| r.domain == d && r.strategy == s).map(f).collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    };
    let overall =
        |s: Strategy| rows.iter().filter(|r| r.strategy == s).map(|r| r.ratio).sum::<f64>() / (rows.len() / 3) as f64;
    let (base, pre, clu) = (overall(Strategy::Base), overall(Strategy::Pretrain), overall(Strategy::Precluster));
    if !(base >= pre && clu >= C5_CLUSTER_FACTOR * base && base >= clu) {
        return Check::new(false, format!("mean ratios base {base}, pretrain {pre}, precluster {clu}"));
    }
    for d in domains::SUITE_NAMES {
        let nodes = (mean(d, Strategy::Base, |r| r.nodes as f64), mean(d, Strategy::Precluster, |r| r.nodes as f64));
        let steps = (mean(d, Strategy::Base, |r| r.steps as f64), mean(d, Strategy::Precluster, |r| r.steps as f64));
        if nodes.1 >= nodes.0 || steps.1 >= steps.0 {
            return Check::new(false, format!("{d}: nodes {nodes:?}, steps {steps:?} (base, precluster)"));
        }
    }
    Check::new(
        true,
        format!("mean ratios base {base:.3} >= pretrain {pre:.3}, precluster {clu:.3} >= 0.8 * base; precluster cheaper on all 4 domains"),
    )
}

/// Satisfaction semantics against the brute-force checker on generated cases.
pub fn criterion_6() -> Check {
    const CASES: u64 = 240;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..CASES {
        let m = domains::random_mdp(5000 + case, rng.gen_range(2..=20), rng.gen_range(2..=3), rng.gen_range(1..=3));
        let vars = m.variables().len();
        let mut seq = Vec::new();
        let stochastic: Vec<&str> = m.action_names().filter(|a| m.action(a).unwrap().is_stochastic()).collect();
        if rng.gen_bool(0.5) && !stochastic.is_empty() {
            let a = stochastic.choose(&mut rng).unwrap().to_string();
            seq.push(GroundedTransform::AllOutcomeDeterminization { action: a });
        }
        if rng.gen_bool(0.5) && vars > 1 {
            let v = rng.gen_range(0..vars);
            seq.push(GroundedTransform::StateSpaceReduction {
                features: vec![m.variables()[v].feature_name().to_string()],
            });
        }
        seq.shuffle(&mut rng);
        let applied = TransformSequence::new(seq).apply(&m).unwrap();
        let q = solve(&applied.model, &SolverConfig::default()).unwrap();
        let pi = extract_policy(&q);
        let policy = policy_map(&q);

        // reflexivity: the actor's own choices, read back through the mappings
        if applied.phi.is_identity() && applied.psi.is_identity() {
            let mut own = PartialPolicy::new();
            for (s, a) in pi.iter() {
                own.insert(s.clone(), a);
            }
            let r = satisfies(&pi, &own, &applied.phi, &applied.psi);
            if !r.satisfied || r.ratio != 1.0 {
                return Check::new(false, format!("case {case}: reflexivity fails"));
            }
        }

        let mut anticipated = PartialPolicy::new();
        let names: Vec<&str> = m.action_names().collect();
        for s in all_states(&m) {
            if rng.gen_bool(0.6) {
                anticipated.insert(s, *names.choose(&mut rng).unwrap());
            }
        }
        let lib = satisfies(&pi, &anticipated, &applied.phi, &applied.psi);
        let (sat, ratio, bad) = brute_satisfaction(&policy, &applied.model, &anticipated);
        let lib_bad: BTreeSet<State> = lib.mismatches.iter().map(|x| x.state.clone()).collect();
        if lib.satisfied != sat || (lib.ratio - ratio).abs() > 1e-12 || lib_bad != bad {
            return Check::new(
                false,
                format!("case {case}: library {} / {}, brute force {sat} / {ratio}", lib.satisfied, lib.ratio),
            );
        }
        if !(0.0..=1.0).contains(&lib.ratio) || lib.total != anticipated.len() {
            return Check::new(false, format!("case {case}: ratio {} out of bounds", lib.ratio));
        }
    }
    Check::new(true, format!("{CASES} generated cases agree with the brute-force checker"))
}

/// Fixture instances whose catalog cannot reach a satisfying model, so the
/// search runs to the depth limit.
pub fn unsolvable(name: &str) -> RlpeInstance {
    let mut inst = RlpeInstance::from_fixture(domains::fixture(name).unwrap());
    match name {
        "twocell" => {
            inst.anticipated = PartialPolicy::new();
            inst.anticipated.insert(inst.model.initial_state(), "stay");
        }
        "taxi-fuel" => {
            inst.catalog = vec![TransformSchema::new(TransformKind::PreconditionRelaxation).for_literals([
                "no-wall-east",
                "no-wall-west",
                "no-north-edge",
                "no-south-edge",
                "no-east-edge",
                "no-west-edge",
            ])];
        }
        _ => inst.catalog.truncate(1),
    }
    inst
}
