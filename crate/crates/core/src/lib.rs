//! Bandits with a known set of parameter vectors, clustered bandits over
//! arriving users, and numeric evaluators for their regret bounds.
//!
//! ```
//! use clusterbandit::{kt_select, ArmStats, KtPolicyConfig, ParameterSet};
//!
//! let params = ParameterSet::new(vec![vec![0.6, 0.5, 0.5, 0.5], vec![0.5, 0.6, 0.5, 0.5]]).unwrap();
//! let config = KtPolicyConfig::exact(params, 0.0).unwrap();
//! let stats = ArmStats::new(4);
//! assert_eq!(kt_select(&stats, &config).unwrap(), 0);
//! ```

pub mod bounds;
pub mod clustered;
pub mod clustering;
pub mod env;
mod error;
pub mod harness;
pub mod kl;
pub mod params;
pub mod policy;
pub mod presets;
pub mod seeding;
pub mod stats;

pub use bounds::{
    eq1_lower_bound, eq1_report, gamma, lemma1_report, thm1_bound, thm3_bound, BoundKind, BoundReport,
    LowerBound,
};
pub use clustered::{ClusteredConfig, ClusteredKind, ClusteredState, PerUserUcb, UcbOnTypes};
pub use clustering::{estimate_g, kmeans, match_clusters, ClusterModel, MatchResult};
pub use env::{
    generate_arrivals, run_experiment, AlgorithmSpec, ArrivalConfig, Arrivals, Policy, RunTrace, Slot,
    TraceOptions, UserId,
};
pub use error::{Error, Result};
pub use kl::bernoulli_kl;
pub use params::{
    classify_condition, confusion_set, derive_structure, epsilon_star, Condition, ConditionVerdict,
    DerivedStructure, ParameterSet,
};
pub use policy::{kt_select, ucb_index, ucb_select, ucb_step, KtPolicyConfig};
pub use stats::ArmStats;
