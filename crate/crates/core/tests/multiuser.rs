use clusterbandit::clustered::{ClusteredConfig, ClusteredKind, ClusteredState, PerUserUcb, UcbOnTypes};
use clusterbandit::env::{generate_arrivals, run_experiment, run_policy, AlgorithmSpec, ArrivalConfig, Policy, TraceOptions};
use clusterbandit::harness::{self, AlgorithmEntry, AlgorithmParams, ExperimentConfig, Setting};
use clusterbandit::presets::fig2_parameter_set;
use clusterbandit::{ArmStats, ParameterSet};
use proptest::prelude::*;

fn arrival(users: usize, tau: usize) -> ArrivalConfig {
    ArrivalConfig {
        num_users: users,
        tau,
        type_probs: vec![0.5, 0.5],
    }
}

fn full() -> TraceOptions {
    TraceOptions {
        checkpoint_every: 100,
        full_trace: true,
    }
}

fn all_specs() -> Vec<AlgorithmSpec> {
    vec![
        AlgorithmSpec::Oracle,
        AlgorithmSpec::FixedArm { arm: 2 },
        AlgorithmSpec::Ucb { elite_only: false },
        AlgorithmSpec::Ucb { elite_only: true },
        AlgorithmSpec::UcbKt { delta: 0.0 },
        AlgorithmSpec::UcbOnTypes,
        AlgorithmSpec::UnifClusteringEt { m0: 6, delta: 0.01 },
        AlgorithmSpec::UcbClusteringEt { m0: 6, delta: 0.01 },
        AlgorithmSpec::ContinuousClustering {
            m_th: None,
            recluster_every: 1,
        },
    ]
}

#[test]
fn every_algorithm_is_deterministic_with_nonnegative_regret() {
    let params = fig2_parameter_set();
    let arrivals = generate_arrivals(&arrival(20, 50), 4).unwrap();
    for spec in all_specs() {
        let a = run_experiment(&params, &arrivals, &spec, 9, full()).unwrap();
        let b = run_experiment(&params, &arrivals, &spec, 9, full()).unwrap();
        assert_eq!(a, b, "{spec:?}");
        assert!(a.steps.iter().all(|s| s.regret_increment >= 0.0), "{spec:?}");
        assert!(a.checkpoints.windows(2).all(|w| w[0].cumulative_regret <= w[1].cumulative_regret));
        let sum: f64 = a.steps.iter().map(|s| s.regret_increment).sum();
        assert!((sum - a.cumulative_regret).abs() < 1e-9);
    }
}

#[test]
fn fixed_arm_accrues_constant_gap() {
    let params = fig2_parameter_set();
    let arrivals = generate_arrivals(
        &ArrivalConfig {
            num_users: 5,
            tau: 40,
            type_probs: vec![1.0, 0.0],
        },
        1,
    )
    .unwrap();
    let trace = run_experiment(&params, &arrivals, &AlgorithmSpec::FixedArm { arm: 1 }, 1, full()).unwrap();
    assert!(trace.steps.iter().all(|s| (s.regret_increment - 0.1).abs() < 1e-12));
}

#[test]
fn pulls_are_conserved_and_pilot_set_is_append_only() {
    let params = fig2_parameter_set();
    let arrivals = generate_arrivals(&arrival(30, 40), 2).unwrap();
    for kind in [ClusteredKind::UnifExplore, ClusteredKind::UcbExplore, ClusteredKind::Continuous] {
        let config = match kind {
            ClusteredKind::Continuous => ClusteredConfig::continuous(2, 4, 2, 1),
            _ => ClusteredConfig::explore(2, 4, 5, 0.01),
        };
        let mut state = ClusteredState::new(kind, config, 3).unwrap();
        let mut rng_params = clusterbandit::seeding::stream_rng(3, clusterbandit::seeding::Stream::Rewards);
        let mut previous: Vec<u64> = Vec::new();
        for slot in arrivals.slots() {
            let arm = state.select(&slot).unwrap();
            let reward = clusterbandit::env::sample_reward(&params, slot.true_type, arm, &mut rng_params);
            state.update(&slot, arm, reward).unwrap();
            let total: u64 = state.users().iter().map(|u| u.stats.t).sum();
            assert_eq!(total, slot.t);
            let pilots = state.pilot_set();
            assert!(pilots.starts_with(&previous));
            assert!(pilots.len() <= 5);
            previous = pilots.to_vec();
        }
        if kind != ClusteredKind::Continuous {
            assert_eq!(previous, vec![0, 1, 2, 3, 4]);
            assert!(state.estimated_params().is_some());
        }
    }
}

#[test]
fn non_pilot_reward_leaves_estimates_alone() {
    let params = fig2_parameter_set();
    let arrivals = generate_arrivals(&arrival(8, 40), 6).unwrap();
    let mut state = ClusteredState::new(ClusteredKind::UnifExplore, ClusteredConfig::explore(2, 4, 3, 0.01), 6).unwrap();
    let mut rewards = clusterbandit::seeding::stream_rng(6, clusterbandit::seeding::Stream::Rewards);
    for slot in arrivals.slots() {
        let before = state.estimated_params().cloned();
        let arm = state.select(&slot).unwrap();
        let reward = clusterbandit::env::sample_reward(&params, slot.true_type, arm, &mut rewards);
        state.update(&slot, arm, reward).unwrap();
        let pilot = state.user(slot.user).unwrap().is_pilot;
        if !pilot {
            assert_eq!(state.estimated_params().cloned(), before);
        } else if state.pilot_set().len() == 3 {
            assert!(state.estimated_params().is_some());
        }
    }
}

fn history() -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
    proptest::collection::vec((1u64..30, 0u64..30), 4).prop_map(|v| {
        let counts: Vec<u64> = v.iter().map(|&(c, _)| c).collect();
        let sums = v.iter().map(|&(c, s)| s.min(c)).collect();
        (counts, sums)
    })
}

proptest! {
    #[test]
    fn explore_variants_agree_on_non_pilots(
        est in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 4), 2),
        (counts, sums) in history(),
    ) {
        let estimated = ParameterSet::new(est).unwrap();
        let stats = ArmStats::from_counts(counts, sums).unwrap();
        let mut states: Vec<ClusteredState> = [ClusteredKind::UnifExplore, ClusteredKind::UcbExplore]
            .into_iter()
            .map(|kind| {
                let mut s = ClusteredState::new(kind, ClusteredConfig::explore(2, 4, 2, 0.01), 1).unwrap();
                s.step(100).unwrap();
                s.step(101).unwrap();
                s.set_estimated_params(estimated.clone()).unwrap();
                s.set_user_stats(7, stats.clone()).unwrap();
                s
            })
            .collect();
        let a = states[0].alg2_step(7).unwrap();
        let b = states[1].alg3_step(7).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn alg4_pooled_stats() {
    let mut s = ClusteredState::new(ClusteredKind::Continuous, ClusteredConfig::continuous(1, 2, 1, 1), 0).unwrap();
    s.set_user_stats(1, ArmStats::from_counts(vec![2, 0], vec![1, 0]).unwrap()).unwrap();
    s.set_user_stats(2, ArmStats::from_counts(vec![0, 2], vec![0, 2]).unwrap()).unwrap();
    s.alg4_step(1).unwrap();
    assert_eq!(s.per_cluster_stats()[0].means, vec![0.5, 1.0]);
}

#[test]
fn alg4_identical_users_share_a_cluster() {
    let mut s = ClusteredState::new(ClusteredKind::Continuous, ClusteredConfig::continuous(2, 3, 2, 1), 8).unwrap();
    let same = ArmStats::from_counts(vec![4, 4, 4], vec![1, 2, 3]).unwrap();
    s.set_user_stats(1, same.clone()).unwrap();
    s.set_user_stats(2, same).unwrap();
    s.set_user_stats(3, ArmStats::from_counts(vec![4, 4, 4], vec![4, 0, 0]).unwrap()).unwrap();
    s.alg4_step(1).unwrap();
    let a = &s.cluster_model().unwrap().assignment;
    assert_eq!(a[0], a[1]);
    assert_ne!(a[0], a[2]);
}

#[test]
fn alg4_without_threshold_is_per_user_ucb() {
    let params = fig2_parameter_set();
    let cfg = arrival(40, 60);
    let arrivals = generate_arrivals(&cfg, 12).unwrap();
    let mut alg4 = ClusteredState::new(
        ClusteredKind::Continuous,
        ClusteredConfig::continuous(cfg.num_users, 4, usize::MAX, 1),
        12,
    )
    .unwrap();
    let mut baseline = PerUserUcb::new(4, None);
    let a = run_policy(&params, &arrivals, &mut alg4, 12, full()).unwrap();
    let b = run_policy(&params, &arrivals, &mut baseline, 12, full()).unwrap();
    assert_eq!(a.steps, b.steps);
}

#[test]
fn ucb_on_types_settles_on_optimal_arms() {
    let params = fig2_parameter_set();
    let arrivals = generate_arrivals(&arrival(1000, 100), 21).unwrap();
    let mut policy = UcbOnTypes::new(2, 4);
    let trace = run_policy(&params, &arrivals, &mut policy, 21, full()).unwrap();
    let tail = &trace.steps[trace.steps.len() * 9 / 10..];
    let hits = tail.iter().filter(|s| s.arm == params.best_arm(s.true_type)).count();
    let freq = hits as f64 / tail.len() as f64;
    assert!(freq >= 0.99, "optimal-arm frequency {freq}");
}

#[test]
fn ucb_on_types_lower_bounds_continuous_clustering() {
    let entry = |name: &str| AlgorithmEntry {
        name: name.into(),
        label: None,
        params: AlgorithmParams::default(),
    };
    let config = ExperimentConfig {
        parameter_set: fig2_parameter_set(),
        setting: Setting::Arrival(arrival(200, 100)),
        algorithms: vec![entry("ucb-on-types"), entry("clustering-ucb-continuous")],
        runs: 20,
        seed: 40,
        checkpoint_every: 1000,
    };
    let out = harness::run(&config, 2, false).unwrap();
    let types = out.curve.last("ucb-on-types").unwrap();
    let alg4 = out.curve.last("clustering-ucb-continuous").unwrap();
    let se = (types.stderr.powi(2) + alg4.stderr.powi(2)).sqrt();
    assert!(types.mean_regret <= alg4.mean_regret + 2.0 * se);
}
