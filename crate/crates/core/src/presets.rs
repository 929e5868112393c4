//! The two reference experiments.

use crate::harness::{AlgorithmEntry, AlgorithmParams, ExperimentConfig, Setting, SingleUserConfig};
use crate::env::ArrivalConfig;
use crate::params::ParameterSet;

/// Default single-user horizon of the first experiment.
pub const FIG1_HORIZON: u64 = 5_000;
pub const FIG1_RUNS: usize = 100;
pub const FIG2_RUNS: usize = 20;
pub const FIG2_USERS: usize = 2000;
pub const FIG2_TAU: usize = 100;
pub const FIG2_M0: usize = 40;
pub const FIG2_DELTA: f64 = 0.01;

/// 21 types over 21 arms. Type 0 prefers arm 0 (0.55 vs 0.5 elsewhere);
/// type x ≥ 1 shares 0.55 on arm 0 but prefers arm x at 0.6.
pub fn fig1_parameter_set() -> ParameterSet {
    let rows = (0..21)
        .map(|x| {
            (0..21)
                .map(|a| match (x, a) {
                    (_, 0) => 0.55,
                    (x, a) if x == a => 0.6,
                    _ => 0.5,
                })
                .collect()
        })
        .collect();
    ParameterSet::new(rows).expect("valid preset")
}

/// Two types over four arms, each preferring a different arm by 0.1.
pub fn fig2_parameter_set() -> ParameterSet {
    ParameterSet::new(vec![vec![0.6, 0.5, 0.5, 0.5], vec![0.5, 0.6, 0.5, 0.5]]).expect("valid preset")
}

/// Type 0 with probability 1/2, each other type with probability 1/40.
pub fn fig1_type_probs() -> Vec<f64> {
    std::iter::once(0.5).chain(std::iter::repeat_n(1.0 / 40.0, 20)).collect()
}

fn entry(name: &str, label: Option<&str>, params: AlgorithmParams) -> AlgorithmEntry {
    AlgorithmEntry {
        name: name.to_string(),
        label: label.map(str::to_string),
        params,
    }
}

pub fn preset_fig1(horizon: u64) -> ExperimentConfig {
    ExperimentConfig {
        parameter_set: fig1_parameter_set(),
        setting: Setting::SingleUser(SingleUserConfig {
            true_type_distribution: fig1_type_probs(),
            horizon,
        }),
        algorithms: vec![
            entry(
                "ucb",
                Some("ucb-elite"),
                AlgorithmParams {
                    elite_only: Some(true),
                    ..Default::default()
                },
            ),
            entry(
                "ucb-kt",
                None,
                AlgorithmParams {
                    delta: Some(0.0),
                    ..Default::default()
                },
            ),
        ],
        runs: FIG1_RUNS,
        seed: 1,
        checkpoint_every: 100,
    }
}

pub fn preset_fig2() -> ExperimentConfig {
    let explore = AlgorithmParams {
        m0: Some(FIG2_M0),
        delta: Some(FIG2_DELTA),
        ..Default::default()
    };
    ExperimentConfig {
        parameter_set: fig2_parameter_set(),
        setting: Setting::Arrival(ArrivalConfig {
            num_users: FIG2_USERS,
            tau: FIG2_TAU,
            type_probs: vec![0.5, 0.5],
        }),
        algorithms: vec![
            entry("ucb", Some("ucb-per-user"), AlgorithmParams::default()),
            entry(
                "clustering-ucb-continuous",
                None,
                AlgorithmParams {
                    recluster_every: Some(1),
                    ..Default::default()
                },
            ),
            entry("unif-clustering-ucb-et", None, explore.clone()),
            entry("ucb-clustering-ucb-et", None, explore),
            entry("ucb-on-types", None, AlgorithmParams::default()),
        ],
        runs: FIG2_RUNS,
        seed: 1,
        checkpoint_every: 100,
    }
}
