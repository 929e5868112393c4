//! The simulated world: sequential user sessions, Bernoulli rewards and
//! pseudo-regret accounting against the type-aware oracle.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustered::{ClusteredConfig, ClusteredKind, ClusteredState, PerUserUcb, UcbOnTypes};
use crate::error::{Error, Result};
use crate::params::{derive_structure, derive_structure_lenient, ParameterSet};
use crate::policy::{kt_select, KtPolicyConfig};
use crate::seeding::{stream_rng, Stream};
use crate::stats::ArmStats;

pub type UserId = u64;

/// One decision slot. `true_type` is only read by policies that are allowed
/// to know it (the oracle and UCB-on-types).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    /// 1-based global time.
    pub t: u64,
    pub user: UserId,
    pub true_type: usize,
}

pub trait Policy: Send {
    fn select(&mut self, slot: &Slot) -> Result<usize>;
    fn update(&mut self, slot: &Slot, arm: usize, reward: u8) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalConfig {
    pub num_users: usize,
    pub tau: usize,
    pub type_probs: Vec<f64>,
}

impl ArrivalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 || self.tau == 0 {
            return Err(Error::InvalidArgument(
                "num_users and tau must be at least 1".into(),
            ));
        }
        if self.type_probs.is_empty() || self.type_probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument(
                "type_probs must be non-empty and non-negative".into(),
            ));
        }
        let total: f64 = self.type_probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "type_probs must sum to 1, got {total}"
            )));
        }
        Ok(())
    }

    pub fn horizon(&self) -> u64 {
        (self.num_users * self.tau) as u64
    }
}

/// Sequential sessions: user `u` occupies slots `u·τ + 1 ..= (u+1)·τ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrivals {
    pub tau: usize,
    /// True type of each user, in arrival order.
    pub types: Vec<usize>,
}

impl Arrivals {
    pub fn horizon(&self) -> u64 {
        (self.types.len() * self.tau) as u64
    }

    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        self.types.iter().enumerate().flat_map(move |(u, &x)| {
            (0..self.tau).map(move |s| Slot {
                t: (u * self.tau + s + 1) as u64,
                user: u as UserId,
                true_type: x,
            })
        })
    }
}

pub fn generate_arrivals(config: &ArrivalConfig, seed: u64) -> Result<Arrivals> {
    config.validate()?;
    let mut rng = stream_rng(seed, Stream::Types);
    let last = config.type_probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let types = (0..config.num_users)
        .map(|_| {
            let mut u: f64 = rng.random();
            for (x, &p) in config.type_probs.iter().enumerate() {
                if u < p {
                    return x;
                }
                u -= p;
            }
            last
        })
        .collect();
    Ok(Arrivals {
        tau: config.tau,
        types,
    })
}

pub fn sample_reward<R: Rng + ?Sized>(params: &ParameterSet, x: usize, a: usize, rng: &mut R) -> u8 {
    u8::from(rng.random::<f64>() < params.mean(x, a))
}

/// Every algorithm the harness can run.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSpec {
    Oracle,
    FixedArm { arm: usize },
    /// Per-user UCB, optionally restricted to the elite arms of the true set.
    Ucb { elite_only: bool },
    /// Per-user known-type learner on the true parameter set.
    UcbKt { delta: f64 },
    UcbOnTypes,
    UnifClusteringEt { m0: usize, delta: f64 },
    UcbClusteringEt { m0: usize, delta: f64 },
    ContinuousClustering { m_th: Option<usize>, recluster_every: usize },
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Oracle => "oracle",
            Self::FixedArm { .. } => "fixed-arm",
            Self::Ucb { .. } => "ucb",
            Self::UcbKt { .. } => "ucb-kt",
            Self::UcbOnTypes => "ucb-on-types",
            Self::UnifClusteringEt { .. } => "unif-clustering-ucb-et",
            Self::UcbClusteringEt { .. } => "ucb-clustering-ucb-et",
            Self::ContinuousClustering { .. } => "clustering-ucb-continuous",
        }
    }

    pub fn build(&self, params: &ParameterSet, seed: u64) -> Result<Box<dyn Policy>> {
        let k = params.n_arms();
        Ok(match *self {
            Self::Oracle => Box::new(OraclePolicy::new(params)),
            Self::FixedArm { arm } => {
                if arm >= k {
                    return Err(Error::ArmOutOfRange { a: arm, n_arms: k });
                }
                Box::new(FixedArmPolicy(arm))
            }
            Self::Ucb { elite_only } => {
                let subset = if elite_only {
                    Some(derive_structure_lenient(params).elite)
                } else {
                    None
                };
                Box::new(PerUserUcb::new(k, subset))
            }
            Self::UcbKt { delta } => Box::new(PerUserKt::new(KtPolicyConfig::exact(
                params.clone(),
                delta,
            )?)),
            Self::UcbOnTypes => Box::new(UcbOnTypes::new(params.n_types(), k)),
            Self::UnifClusteringEt { m0, delta } => Box::new(ClusteredState::new(
                ClusteredKind::UnifExplore,
                ClusteredConfig::explore(params.n_types(), k, m0, delta),
                seed,
            )?),
            Self::UcbClusteringEt { m0, delta } => Box::new(ClusteredState::new(
                ClusteredKind::UcbExplore,
                ClusteredConfig::explore(params.n_types(), k, m0, delta),
                seed,
            )?),
            Self::ContinuousClustering {
                m_th,
                recluster_every,
            } => Box::new(ClusteredState::new(
                ClusteredKind::Continuous,
                ClusteredConfig::continuous(
                    params.n_types(),
                    k,
                    m_th.unwrap_or(params.n_types()),
                    recluster_every,
                ),
                seed,
            )?),
        })
    }
}

pub struct OraclePolicy {
    best_arm: Vec<usize>,
}

impl OraclePolicy {
    pub fn new(params: &ParameterSet) -> Self {
        Self {
            best_arm: derive_structure_lenient(params).best_arm,
        }
    }
}

impl Policy for OraclePolicy {
    fn select(&mut self, slot: &Slot) -> Result<usize> {
        self.best_arm
            .get(slot.true_type)
            .copied()
            .ok_or(Error::MissingType(slot.user))
    }

    fn update(&mut self, _: &Slot, _: usize, _: u8) -> Result<()> {
        Ok(())
    }
}

pub struct FixedArmPolicy(pub usize);

impl Policy for FixedArmPolicy {
    fn select(&mut self, _: &Slot) -> Result<usize> {
        Ok(self.0)
    }

    fn update(&mut self, _: &Slot, _: usize, _: u8) -> Result<()> {
        Ok(())
    }
}

/// A known-type learner per user, all sharing one reference parameter set.
pub struct PerUserKt {
    config: KtPolicyConfig,
    users: HashMap<UserId, ArmStats>,
}

impl PerUserKt {
    pub fn new(config: KtPolicyConfig) -> Self {
        Self {
            config,
            users: HashMap::new(),
        }
    }
}

impl Policy for PerUserKt {
    fn select(&mut self, slot: &Slot) -> Result<usize> {
        let k = self.config.n_arms();
        let stats = self.users.entry(slot.user).or_insert_with(|| ArmStats::new(k));
        kt_select(stats, &self.config)
    }

    fn update(&mut self, slot: &Slot, arm: usize, reward: u8) -> Result<()> {
        self.users
            .get_mut(&slot.user)
            .ok_or(Error::UnknownUser(slot.user))?
            .record(arm, reward)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub user: UserId,
    pub true_type: usize,
    pub arm: usize,
    pub reward: u8,
    pub regret_increment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: u64,
    pub cumulative_regret: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceOptions {
    /// Stride of the cumulative-regret checkpoints; the final slot is always
    /// included.
    pub checkpoint_every: u64,
    /// Keep every step record.
    pub full_trace: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            checkpoint_every: 100,
            full_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub checkpoints: Vec<Checkpoint>,
    /// Empty unless [`TraceOptions::full_trace`] is set.
    pub steps: Vec<StepRecord>,
    pub cumulative_regret: f64,
}

impl RunTrace {
    pub fn regret_at(&self, t: u64) -> Option<f64> {
        self.checkpoints
            .iter()
            .find(|c| c.t == t)
            .map(|c| c.cumulative_regret)
    }
}

/// Builds `algorithm` and drives it over `arrivals`.
pub fn run_experiment(
    params: &ParameterSet,
    arrivals: &Arrivals,
    algorithm: &AlgorithmSpec,
    seed: u64,
    options: TraceOptions,
) -> Result<RunTrace> {
    let mut policy = algorithm.build(params, seed)?;
    run_policy(params, arrivals, policy.as_mut(), seed, options)
}

/// Drives an already-built policy. Rewards come from the run's reward stream
/// with one uniform draw per slot, so every policy on the same seed faces the
/// same reward tape.
pub fn run_policy(
    params: &ParameterSet,
    arrivals: &Arrivals,
    policy: &mut dyn Policy,
    seed: u64,
    options: TraceOptions,
) -> Result<RunTrace> {
    if options.checkpoint_every == 0 {
        return Err(Error::InvalidArgument("checkpoint_every must be at least 1".into()));
    }
    if let Some(&x) = arrivals.types.iter().find(|&&x| x >= params.n_types()) {
        return Err(Error::TypeOutOfRange {
            x,
            n_types: params.n_types(),
        });
    }
    let best_value: Vec<f64> = (0..params.n_types()).map(|x| params.best_value(x)).collect();
    let mut rewards = stream_rng(seed, Stream::Rewards);
    let horizon = arrivals.horizon();
    let mut trace = RunTrace::default();
    let mut cumulative = 0.0;
    for slot in arrivals.slots() {
        let arm = policy.select(&slot)?;
        if arm >= params.n_arms() {
            return Err(Error::ArmOutOfRange {
                a: arm,
                n_arms: params.n_arms(),
            });
        }
        let reward = sample_reward(params, slot.true_type, arm, &mut rewards);
        policy.update(&slot, arm, reward)?;
        let increment = best_value[slot.true_type] - params.mean(slot.true_type, arm);
        cumulative += increment;
        if options.full_trace {
            trace.steps.push(StepRecord {
                t: slot.t,
                user: slot.user,
                true_type: slot.true_type,
                arm,
                reward,
                regret_increment: increment,
            });
        }
        if slot.t % options.checkpoint_every == 0 || slot.t == horizon {
            trace.checkpoints.push(Checkpoint {
                t: slot.t,
                cumulative_regret: cumulative,
            });
        }
    }
    trace.cumulative_regret = cumulative;
    Ok(trace)
}

/// Single-user setting: one learner facing a fixed true type for `horizon`
/// slots.
pub fn single_user_arrivals(true_type: usize, horizon: usize) -> Arrivals {
    Arrivals {
        tau: horizon,
        types: vec![true_type],
    }
}

/// Checks the parameter set is usable by `algorithm` without running it.
pub fn check_algorithm(params: &ParameterSet, algorithm: &AlgorithmSpec) -> Result<()> {
    match algorithm {
        AlgorithmSpec::UcbKt { .. } => derive_structure(params).map(|_| ()),
        _ => algorithm.build(params, 0).map(|_| ()),
    }
}
