mod common;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use cmcgs::cluster::{agglomerative_cluster, try_split_layer};
use cmcgs::env::kinematics::forward_kinematics;
use cmcgs::env::layout::{Disc, Layout, NavigationLayout, Point};
use cmcgs::env::load_environment;
use cmcgs::params::{CmcgsParams, Hyperparameters};
use cmcgs::planner::{PlanRng, PlannerKind};
use cmcgs::stats::{ActionBandit, DiagonalGaussian, Experience, StdSchedule};

use common::{brute_force_ward, gaussian_log_density, rotation_fk};

#[test]
fn grid_moments_match_closed_form() {
    // 10 x 10 grid with spacings h and g: each coordinate is uniform over an
    // arithmetic sequence, with mean (n-1)/2 * step and variance
    // (n^2 - 1)/12 * step^2.
    let (h, g, ox, oy) = (0.3, 1.7, -2.0, 5.0);
    let states: Vec<Vec<f64>> =
        (0..10).flat_map(|i| (0..10).map(move |j| vec![ox + h * i as f64, oy + g * j as f64])).collect();
    let fit = DiagonalGaussian::fit(&states).unwrap();
    let expected_mean = [ox + 4.5 * h, oy + 4.5 * g];
    let expected_var = [99.0 / 12.0 * h * h, 99.0 / 12.0 * g * g];
    for d in 0..2 {
        assert!((fit.mean()[d] - expected_mean[d]).abs() < 1e-9);
        assert!((fit.variance()[d] - expected_var[d]).abs() < 1e-9);
    }
}

#[test]
fn log_likelihood_matches_product_of_densities() {
    let mut rng = PlanRng::seed_from_u64(11);
    for _ in 0..1000 {
        let mean: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let var: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..3.0)).collect();
        let x: Vec<f64> = mean.iter().zip(&var).map(|(m, v)| m + v.sqrt() * rng.random_range(-2.0..2.0)).collect();
        let g = DiagonalGaussian::new(mean.clone(), var.clone()).unwrap();
        let ll = g.log_likelihood(&x).unwrap();
        assert!((ll - gaussian_log_density(&x, &mean, &var)).abs() < 1e-12, "{ll}");
    }
}

#[test]
fn forward_kinematics_matches_rotation_oracle() {
    let mut rng = PlanRng::seed_from_u64(3);
    for links in [1, 2, 15, 30] {
        for _ in 0..200 {
            let angles: Vec<f64> =
                (0..links).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
            let lengths = vec![1.0 / links as f64; links];
            let got = forward_kinematics(&angles, &lengths);
            let want = rotation_fk(&angles, &lengths);
            assert_eq!(got.len(), links + 1);
            for (a, b) in got.iter().zip(&want) {
                assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn bandit_sample_spread_matches_requested_std() {
    let bandit = ActionBandit::from_parts(vec![0.0], 0.5, 0);
    let mut rng = PlanRng::seed_from_u64(5);
    let n = 100_000;
    let draws: Vec<f64> = (0..n).map(|_| bandit.sample_unclamped(&mut rng)[0]).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let std = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!((std - 0.5).abs() < 0.02, "{std}");
}

#[test]
fn random_planner_is_centred() {
    let mut env = load_environment("2d-reacher-fifteen-poles").unwrap();
    env.reset(0);
    let snapshot = env.snapshot();
    let mut planner = PlannerKind::Random.build(&Hyperparameters::default());
    let mut rng = PlanRng::seed_from_u64(9);
    let n = 100_000 / 15 + 1;
    let mut sums = [0.0; 15];
    for _ in 0..n {
        let r = planner.plan(env.as_mut(), &snapshot, 1, &mut rng).unwrap();
        assert_eq!(r.env_steps_used, 0);
        for (s, a) in sums.iter_mut().zip(&r.action) {
            assert!((-1.0..=1.0).contains(a));
            *s += a;
        }
    }
    // Pooled over dimensions: 100k draws in total.
    let pooled = sums.iter().sum::<f64>() / (n * 15) as f64;
    assert!(pooled.abs() < 0.01, "{pooled}");
    let mut env = load_environment("quadratic-bandit").unwrap();
    env.reset(0);
    let snapshot = env.snapshot();
    let mean =
        (0..100_000).map(|_| planner.plan(env.as_mut(), &snapshot, 1, &mut rng).unwrap().action[0]).sum::<f64>() / 1e5;
    assert!(mean.abs() < 0.01, "{mean}");
}

#[test]
fn ward_matches_brute_force_on_seven_points() {
    let mut rng = PlanRng::seed_from_u64(21);
    for _ in 0..50 {
        let pts: Vec<Vec<f64>> = (0..7).map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]).collect();
        assert_eq!(agglomerative_cluster(&pts, 3).unwrap().labels(), brute_force_ward(&pts, 3).as_slice());
    }
}

#[test]
fn three_blobs_are_recovered() {
    let mut rng = PlanRng::seed_from_u64(8);
    let centers = [[0.0, 0.0], [1.5, 0.0], [0.0, 1.5]];
    let mut pts = Vec::new();
    let mut truth = Vec::new();
    for i in 0..30 {
        let c = centers[i % 3];
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        pts.push(vec![c[0] + 0.05 * dx, c[1] + 0.05 * dy]);
        truth.push(i % 3);
    }
    let experiences: Vec<Experience> = pts
        .iter()
        .map(|s| Experience { state: s.clone(), action: vec![0.0], ret: 0.0, next_state: s.clone() })
        .collect();
    let refs: Vec<&Experience> = experiences.iter().collect();
    let split = try_split_layer(&refs, 3, 4).unwrap();
    assert_eq!(split.labels(), common::first_appearance(&truth).as_slice());
    assert_eq!(split.labels(), brute_force_ward(&pts, 3).as_slice());
}

#[test]
fn documented_bandit_schedule_endpoints() {
    let s = StdSchedule::default();
    let prior = ActionBandit::prior(2, &s);
    assert_eq!(prior.mean(), &[0.0, 0.0]);
    assert_eq!(prior.scalar_std(), 0.5);
    let replay: Vec<Experience> = (0..100)
        .map(|i| Experience { state: vec![0.0], action: vec![0.0], ret: i as f64, next_state: vec![0.0] })
        .collect();
    assert_eq!(ActionBandit::fit(&replay, 0.1, &s).unwrap().scalar_std(), 0.15);
    assert_eq!(ActionBandit::fit(&replay[..40], 0.1, &s).unwrap().scalar_std(), 0.5 - 0.35 * 0.4);
}

#[test]
fn default_hyperparameters_match_published_table() {
    let p = CmcgsParams::default();
    assert_eq!(p.initial_depth, 3);
    assert_eq!(p.rollout_length, 5);
    assert_eq!(p.elite_ratio, 0.1);
    let mut h = Hyperparameters::default();
    assert!(h.set("discount_factor", 1.0).is_ok());
    assert!(h.set("discount_factor", 0.99).is_err());
}

fn open_corridor() -> Layout {
    Layout::Navigation(NavigationLayout {
        obstacles: Vec::new(),
        goal: Disc { cx: 0.97, cy: 0.05, r: 0.02 },
        start: Point { x: 0.0, y: 0.5 },
        decision_lines: 10,
    })
}

#[test]
fn navigation_rewards_telescope() {
    // Without obstacles or goal contact, the per-step progress terms sum to
    // the net decrease in goal distance.
    let mut env = open_corridor().build("open").unwrap();
    env.reset(0);
    let actions = [0.3, -1.0, 0.7, 0.0, 1.0, 1.0, -0.2, 0.4, -0.9, 0.5];
    let (mut y, mut total, mut effort) = (0.5f64, 0.0, 0.0);
    for (t, &a) in actions.iter().enumerate() {
        let tr = env.step(&[a]).unwrap();
        total += tr.reward;
        effort += a * a;
        y = (y + 0.15 * a).clamp(0.0, 1.0);
        assert!((tr.state[0] - 0.1 * (t + 1) as f64).abs() < 1e-12);
        assert!((tr.state[1] - y).abs() < 1e-12);
    }
    let dist = |x: f64, y: f64| (x - 0.97f64).hypot(y - 0.05);
    let expected = dist(0.0, 0.5) - dist(1.0, y) - 0.01 * effort;
    assert!((total - expected).abs() < 1e-12, "{total} vs {expected}");
    assert!(env.is_terminal());
}

#[test]
fn layout_round_trip_preserves_behaviour() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = PlanRng::seed_from_u64(4);
    for name in cmcgs::env::layout::PRESET_NAMES.iter().filter(|n| n.starts_with("2d-")) {
        let layout = Layout::preset(name).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        layout.save(&path).unwrap();
        assert_eq!(Layout::load(&path).unwrap(), layout);

        let mut a = layout.clone().build(name).unwrap();
        let mut b = load_environment(path.to_str().unwrap()).unwrap();
        a.reset(1);
        b.reset(1);
        while !a.is_terminal() {
            let action: Vec<f64> = (0..a.action_dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            assert_eq!(a.step(&action).unwrap(), b.step(&action).unwrap());
        }
        assert!(b.is_terminal());
    }
}
