//! Randomized structural invariants, shared by the property-test target and
//! the acceptance run.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::SeedableRng;

use cmcgs::cluster::ClusterAssignment;
use cmcgs::env::{load_environment, Environment};
use cmcgs::harness::{run_episode, ExperimentConfig};
use cmcgs::params::{CmcgsParams, Hyperparameters, PwParams};
use cmcgs::planner::graph::GraphNode;
use cmcgs::planner::mcts_pw::MctsPwPlanner;
use cmcgs::planner::{uniform_action, CmcgsPlanner, PlanRng, PlannerKind, SearchGraph};
use cmcgs::stats::{ActionBandit, Experience, StdSchedule};

use super::CountingEnv;

pub const CASES: u32 = 100;

pub const ENVS: [&str; 5] = [
    "2d-navigation-circles",
    "2d-navigation-boxes",
    "2d-reacher-fifteen-poles",
    "2d-reacher-thirty-poles",
    "quadratic-bandit",
];

#[derive(Debug, Clone)]
pub struct PlanCase {
    pub env: &'static str,
    pub planner: PlannerKind,
    pub budget: u64,
    pub seed: u64,
    /// Random actions applied before planning, to start mid-episode.
    pub prefix: usize,
}

pub fn plan_case(max_budget: u64) -> impl Strategy<Value = PlanCase> {
    (
        prop::sample::select(ENVS.to_vec()),
        prop::sample::select(PlannerKind::ALL.to_vec()),
        1..=max_budget,
        any::<u64>(),
        0usize..4,
    )
        .prop_map(|(env, planner, budget, seed, prefix)| PlanCase { env, planner, budget, seed, prefix })
}

/// Environment advanced by `case.prefix` random actions, or `None` if that
/// ends the episode.
fn prepared_env(case: &PlanCase, rng: &mut PlanRng) -> Option<Box<dyn Environment>> {
    let mut env = load_environment(case.env).unwrap();
    env.reset(case.seed);
    for _ in 0..case.prefix {
        if env.is_terminal() {
            break;
        }
        let a = uniform_action(env.action_dim(), rng);
        env.step(&a).unwrap();
    }
    (!env.is_terminal()).then_some(env)
}

/// Every planner issues at most `budget` step calls, and its reported count
/// equals an independent counter.
pub fn check_budget_accounting(case: PlanCase) -> Result<(), TestCaseError> {
    let mut rng = PlanRng::seed_from_u64(case.seed);
    let Some(env) = prepared_env(&case, &mut rng) else { return Ok(()) };
    let mut sim = CountingEnv::new(env.boxed_clone());
    let before = sim.steps_taken();
    let mut planner = case.planner.build(&Hyperparameters::default());
    let result = planner.plan(&mut sim, &env.snapshot(), case.budget, &mut rng).unwrap();
    prop_assert!(sim.count() <= case.budget, "{} steps with budget {}", sim.count(), case.budget);
    prop_assert_eq!(sim.count(), result.env_steps_used);
    prop_assert_eq!(sim.steps_taken() - before, sim.count());
    prop_assert_eq!(result.action.len(), env.action_dim());
    prop_assert!(result.action.iter().all(|a| (-1.0..=1.0).contains(a)));
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GraphCase {
    pub plan: PlanCase,
    pub n_split: usize,
}

pub fn graph_case() -> impl Strategy<Value = GraphCase> {
    (plan_case(400), prop::sample::select(vec![5usize, 10, 20])).prop_map(|(mut plan, n_split)| {
        plan.planner = PlannerKind::Cmcgs;
        GraphCase { plan, n_split }
    })
}

/// Runs CMCGS and checks the graph after every iteration: one root node,
/// at most `c_max` nodes per layer, visits equal to replay sizes, and depth
/// and widths that never shrink. On navigation, states stored at layer `t`
/// come from simulations that took exactly `t` steps.
pub fn check_graph_structure(case: GraphCase) -> Result<(), TestCaseError> {
    let mut rng = PlanRng::seed_from_u64(case.plan.seed);
    let Some(env) = prepared_env(&case.plan, &mut rng) else { return Ok(()) };
    let mut params = CmcgsParams::default();
    params.split.n_split = case.n_split;
    let c_max = params.split.c_max;
    let planner = CmcgsPlanner::new(params);
    let mut sim = env.boxed_clone();

    // Navigation presets advance x by 0.1 per decision, which tags each
    // stored state with the number of layers its simulation passed through.
    let tag = case.plan.env.starts_with("2d-navigation").then(|| env.observe()[0]);
    let mut violations = Vec::new();
    let mut previous: Vec<usize> = Vec::new();
    let mut iterations = 0usize;
    planner
        .plan_with(sim.as_mut(), &env.snapshot(), case.plan.budget, &mut rng, |graph: &SearchGraph| {
            iterations += 1;
            let shape = graph.shape();
            if shape[0] != 1 {
                violations.push(format!("layer 0 has {} nodes", shape[0]));
            }
            if let Some(w) = shape.iter().find(|&&w| w > c_max) {
                violations.push(format!("layer with {w} nodes"));
            }
            if shape.len() < previous.len() || previous.iter().zip(&shape).any(|(p, s)| s < p) {
                violations.push(format!("graph shrank from {previous:?} to {shape:?}"));
            }
            for (layer, dump) in graph.layers().iter().zip(graph.dump().layers) {
                for (node, d) in layer.iter().zip(dump.nodes) {
                    if node.visits() != node.replay().len() || d.visits != node.replay().len() {
                        violations.push("visits differ from replay size".into());
                    }
                }
            }
            if let Some(x0) = tag {
                for (t, layer) in graph.layers().iter().enumerate() {
                    for e in layer.iter().flat_map(|n| n.replay()) {
                        if (e.state[0] - x0 - 0.1 * t as f64).abs() > 1e-9 {
                            violations.push(format!("state {:?} stored at layer {t}", e.state));
                        }
                    }
                }
            }
            if graph.layer_replay_len(0) != iterations {
                violations
                    .push(format!("root holds {} tuples after {iterations} iterations", graph.layer_replay_len(0)));
            }
            previous = shape;
        })
        .unwrap();
    prop_assert!(violations.is_empty(), "{:?}", violations);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PartitionCase {
    pub experiences: Vec<Experience>,
    /// Node of each experience before widening.
    pub before: Vec<usize>,
    /// Cluster of each pooled experience.
    pub after: Vec<usize>,
}

pub fn partition_case() -> impl Strategy<Value = PartitionCase> {
    (1usize..4, 1usize..60).prop_flat_map(|(dim, n)| {
        (
            prop::collection::vec((prop::collection::vec(-1.0..1.0f64, dim), -1.0..1.0f64, -5.0..5.0f64), n),
            prop::collection::vec(0usize..4, n),
            prop::collection::vec(0usize..8, n),
        )
            .prop_map(|(raw, before, after)| PartitionCase {
                experiences: raw
                    .into_iter()
                    .map(|(state, a, ret)| Experience { next_state: state.clone(), state, action: vec![a], ret })
                    .collect(),
                before,
                after,
            })
    })
}

fn multiset(experiences: impl Iterator<Item = Experience>) -> Vec<String> {
    let mut keys: Vec<String> = experiences.map(|e| format!("{:?}", e)).collect();
    keys.sort();
    keys
}

/// `width_expand` redistributes a layer's pooled replay without adding,
/// dropping or altering any experience.
pub fn check_replay_conservation(case: PartitionCase) -> Result<(), TestCaseError> {
    let params = CmcgsParams::default();
    let mut graph = SearchGraph::new(1, 10, params.clone());
    let mut nodes: Vec<Vec<Experience>> = vec![Vec::new(); 4];
    for (e, &g) in case.experiences.iter().zip(&case.before) {
        nodes[g].push(e.clone());
    }
    let nodes: Vec<GraphNode> =
        nodes.into_iter().filter(|r| !r.is_empty()).map(|r| GraphNode::from_replay(r, 1, &params).unwrap()).collect();
    graph.set_layer(1, nodes);
    let before = multiset(graph.layers()[1].iter().flat_map(|n| n.replay().to_vec()));
    let assignment = ClusterAssignment::from_groups(&case.after);
    graph.width_expand(1, &assignment).unwrap();
    let after = multiset(graph.layers()[1].iter().flat_map(|n| n.replay().to_vec()));
    prop_assert_eq!(before, after);
    prop_assert_eq!(graph.layers()[1].len(), assignment.k());
    prop_assert_eq!(graph.layers()[1].iter().map(|n| n.visits()).collect::<Vec<_>>(), assignment.sizes());
    Ok(())
}

pub fn pw_case() -> impl Strategy<Value = PlanCase> {
    plan_case(600).prop_map(|mut c| {
        c.planner = PlannerKind::MctsPw;
        c
    })
}

/// After every MCTS-PW iteration each node has at most `floor(N^0.5)`
/// children, where `N` is its visit count.
pub fn check_pw_child_bound(case: PlanCase) -> Result<(), TestCaseError> {
    let mut rng = PlanRng::seed_from_u64(case.seed);
    let Some(env) = prepared_env(&case, &mut rng) else { return Ok(()) };
    let mut sim = env.boxed_clone();
    let mut worst: Option<(usize, u64)> = None;
    MctsPwPlanner::new(PwParams::default())
        .search(sim.as_mut(), &env.snapshot(), case.budget, &mut rng, |tree| {
            for node in &tree.nodes {
                let bound = (node.visits as f64).sqrt().floor() as usize;
                if node.children.len() > bound {
                    worst = Some((node.children.len(), node.visits));
                }
            }
        })
        .unwrap();
    prop_assert!(worst.is_none(), "children/visits {:?}", worst);
    Ok(())
}

pub fn replay_case() -> impl Strategy<Value = Vec<Experience>> {
    prop::collection::vec((prop::collection::vec(-3.0..3.0f64, 2), -100.0..100.0f64), 1..300).prop_map(|raw| {
        raw.into_iter()
            .map(|(action, ret)| Experience { state: vec![0.0], action, ret, next_state: vec![0.0] })
            .collect()
    })
}

/// The bandit std stays in `[0.15, 0.5]` and never grows with more data.
pub fn check_scalar_std(replay: Vec<Experience>) -> Result<(), TestCaseError> {
    let schedule = StdSchedule::default();
    let mut previous = f64::INFINITY;
    for n in 1..=replay.len() {
        let bandit = ActionBandit::fit(&replay[..n], 0.1, &schedule).unwrap();
        let std = bandit.scalar_std();
        prop_assert!((0.15..=0.5).contains(&std), "std {} at n = {}", std, n);
        prop_assert!(std <= previous);
        prop_assert!(bandit.mean().iter().all(|m| (-1.0..=1.0).contains(m)));
        previous = std;
    }
    Ok(())
}

pub fn episode_case() -> impl Strategy<Value = PlanCase> {
    plan_case(150)
}

/// Two runs of the same (config, seed) serialize to identical bytes.
pub fn check_episode_determinism(case: PlanCase) -> Result<(), TestCaseError> {
    let config = ExperimentConfig::new(case.env, case.planner, case.budget, vec![case.seed]);
    let params = config.validate().unwrap();
    let a = run_episode(&config, &params, case.seed, true).unwrap();
    let b = run_episode(&config, &params, case.seed, true).unwrap();
    prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    Ok(())
}
