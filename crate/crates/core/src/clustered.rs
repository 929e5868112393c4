//! Multi-user orchestrators.
//!
//! [`ClusteredState`] runs the three clustering algorithms:
//!
//! * explore uniformly on the first `m0` users, cluster them, then run the
//!   known-type learner against the estimated centers (`alg2_step`);
//! * the same with per-user UCB on the pilots (`alg3_step`);
//! * cluster every user continuously and play UCB on the pooled statistics
//!   of the current user's cluster (`alg4_step`).
//!
//! [`PerUserUcb`] and [`UcbOnTypes`] are the baselines.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::clustering::{kmeans_with_rng, lloyd, ClusterModel, DEFAULT_MAX_ITERS, KMEANS_RESTARTS};
use crate::env::{Policy, Slot, UserId};
use crate::error::{Error, Result};
use crate::params::ParameterSet;
use crate::policy::{kt_select, ucb_step, KtPolicyConfig};
use crate::seeding::{stream_rng, Stream};
use crate::stats::ArmStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusteredKind {
    /// Uniform pilots, clustering, known-type learner on estimates.
    UnifExplore,
    /// UCB pilots, clustering, known-type learner on estimates.
    UcbExplore,
    /// Continuous clustering with per-cluster UCB.
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredConfig {
    pub n_types: usize,
    pub n_arms: usize,
    pub m0: usize,
    pub delta: f64,
    /// Users needed before continuous clustering starts.
    pub m_th: usize,
    pub recluster_every: usize,
}

impl ClusteredConfig {
    pub fn explore(n_types: usize, n_arms: usize, m0: usize, delta: f64) -> Self {
        Self {
            n_types,
            n_arms,
            m0,
            delta,
            m_th: n_types,
            recluster_every: 1,
        }
    }

    pub fn continuous(n_types: usize, n_arms: usize, m_th: usize, recluster_every: usize) -> Self {
        Self {
            n_types,
            n_arms,
            m0: 0,
            delta: 0.0,
            m_th,
            recluster_every,
        }
    }

    fn validate(&self, kind: ClusteredKind) -> Result<()> {
        if self.n_types == 0 || self.n_arms == 0 {
            return Err(Error::EmptyParameterSet {
                n_types: self.n_types,
                n_arms: self.n_arms,
            });
        }
        match kind {
            ClusteredKind::UnifExplore | ClusteredKind::UcbExplore => {
                if self.m0 < self.n_types {
                    return Err(Error::InvalidArgument(format!(
                        "m0 ({}) must be at least the number of types ({})",
                        self.m0, self.n_types
                    )));
                }
                if !(self.delta >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "delta must be non-negative, got {}",
                        self.delta
                    )));
                }
            }
            ClusteredKind::Continuous => {
                if self.m_th < self.n_types {
                    return Err(Error::InvalidArgument(format!(
                        "m_th ({}) must be at least the number of types ({})",
                        self.m_th, self.n_types
                    )));
                }
                if self.recluster_every == 0 {
                    return Err(Error::InvalidArgument(
                        "recluster_every must be at least 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserRecord {
    pub user_id: UserId,
    pub stats: ArmStats,
    pub is_pilot: bool,
}

pub struct ClusteredState {
    kind: ClusteredKind,
    config: ClusteredConfig,
    users: Vec<UserRecord>,
    index: HashMap<UserId, usize>,
    pilot_set: Vec<UserId>,
    estimated: Option<KtPolicyConfig>,
    clusters: Option<ClusterModel>,
    users_at_last_full_clustering: usize,
    cluster_steps: u64,
    per_cluster_stats: Vec<ArmStats>,
    policy_rng: ChaCha8Rng,
    cluster_rng: ChaCha8Rng,
    warned_fallback: bool,
}

impl ClusteredState {
    pub fn new(kind: ClusteredKind, config: ClusteredConfig, seed: u64) -> Result<Self> {
        config.validate(kind)?;
        Ok(Self {
            kind,
            per_cluster_stats: vec![ArmStats::new(config.n_arms); config.n_types],
            config,
            users: Vec::new(),
            index: HashMap::new(),
            pilot_set: Vec::new(),
            estimated: None,
            clusters: None,
            users_at_last_full_clustering: 0,
            cluster_steps: 0,
            policy_rng: stream_rng(seed, Stream::Policy),
            cluster_rng: stream_rng(seed, Stream::Clustering),
            warned_fallback: false,
        })
    }

    pub fn kind(&self) -> ClusteredKind {
        self.kind
    }

    pub fn config(&self) -> &ClusteredConfig {
        &self.config
    }

    pub fn pilot_set(&self) -> &[UserId] {
        &self.pilot_set
    }

    pub fn user(&self, id: UserId) -> Option<&UserRecord> {
        self.index.get(&id).map(|&i| &self.users[i])
    }

    pub fn users(&self) -> &[UserRecord] {
        &self.users
    }

    /// Current cluster centers as a parameter set (explore–cluster–exploit).
    pub fn estimated_params(&self) -> Option<&ParameterSet> {
        self.estimated.as_ref().map(|c| &c.reference_params)
    }

    pub fn estimated_policy(&self) -> Option<&KtPolicyConfig> {
        self.estimated.as_ref()
    }

    /// Pooled statistics of each cluster as of the last continuous-clustering step.
    pub fn per_cluster_stats(&self) -> &[ArmStats] {
        &self.per_cluster_stats
    }

    pub fn cluster_model(&self) -> Option<&ClusterModel> {
        self.clusters.as_ref()
    }

    /// Installs estimated centers directly, bypassing pilot clustering.
    pub fn set_estimated_params(&mut self, params: ParameterSet) -> Result<()> {
        self.estimated = Some(KtPolicyConfig::estimated(params, self.config.delta)?);
        Ok(())
    }

    /// Replaces a user's statistics, registering the user if needed.
    pub fn set_user_stats(&mut self, id: UserId, stats: ArmStats) -> Result<()> {
        if stats.n_arms() != self.config.n_arms {
            return Err(Error::LengthMismatch {
                expected: self.config.n_arms,
                got: stats.n_arms(),
            });
        }
        let (i, _) = self.touch(id);
        self.users[i].stats = stats;
        Ok(())
    }

    pub fn step(&mut self, user: UserId) -> Result<usize> {
        match self.kind {
            ClusteredKind::UnifExplore => self.alg2_step(user),
            ClusteredKind::UcbExplore => self.alg3_step(user),
            ClusteredKind::Continuous => self.alg4_step(user),
        }
    }

    fn touch(&mut self, id: UserId) -> (usize, bool) {
        if let Some(&i) = self.index.get(&id) {
            return (i, false);
        }
        let i = self.users.len();
        self.users.push(UserRecord {
            user_id: id,
            stats: ArmStats::new(self.config.n_arms),
            is_pilot: false,
        });
        self.index.insert(id, i);
        (i, true)
    }

    fn admit(&mut self, id: UserId) -> usize {
        let (i, new) = self.touch(id);
        if new && self.pilot_set.len() < self.config.m0 {
            self.users[i].is_pilot = true;
            self.pilot_set.push(id);
        }
        i
    }

    fn uniform_arm(&mut self) -> usize {
        self.policy_rng.random_range(0..self.config.n_arms)
    }

    fn exploit_step(&mut self, i: usize) -> Result<usize> {
        match &self.estimated {
            Some(cfg) => kt_select(&self.users[i].stats, cfg),
            None => {
                if !self.warned_fallback {
                    log::warn!(
                        "user {} arrived before any clustering; playing uniformly",
                        self.users[i].user_id
                    );
                    self.warned_fallback = true;
                }
                Ok(self.uniform_arm())
            }
        }
    }

    /// Uniform pilots, then the known-type learner on the estimated centers.
    pub fn alg2_step(&mut self, user: UserId) -> Result<usize> {
        let i = self.admit(user);
        if self.users[i].is_pilot {
            Ok(self.uniform_arm())
        } else {
            self.exploit_step(i)
        }
    }

    /// UCB pilots, then the known-type learner on the estimated centers.
    pub fn alg3_step(&mut self, user: UserId) -> Result<usize> {
        let i = self.admit(user);
        if self.users[i].is_pilot {
            ucb_step(&self.users[i].stats, None)
        } else {
            self.exploit_step(i)
        }
    }

    /// Per-user UCB below `m_th` users; afterwards UCB on the pooled
    /// statistics of the user's cluster.
    pub fn alg4_step(&mut self, user: UserId) -> Result<usize> {
        let (i, _) = self.touch(user);
        if self.users.len() < self.config.m_th {
            return ucb_step(&self.users[i].stats, None);
        }
        let due = self.cluster_steps % self.config.recluster_every as u64 == 0;
        if self.clusters.is_none() || due {
            self.recluster_all()?;
        }
        self.cluster_steps += 1;
        let model = self.clusters.as_ref().expect("clustered above");
        let cluster = match model.assignment.get(i) {
            Some(&c) => c,
            None => model.nearest(&self.users[i].stats.means),
        };
        let mut pooled = ArmStats::new(self.config.n_arms);
        for (record, &c) in self.users.iter().zip(&model.assignment) {
            if c == cluster {
                pooled.absorb(&record.stats);
            }
        }
        if i >= model.assignment.len() {
            pooled.absorb(&self.users[i].stats);
        }
        let arm = ucb_step(&pooled, None)?;
        self.per_cluster_stats[cluster] = pooled;
        Ok(arm)
    }

    /// Full k-means++ restarts whenever a user has joined since the last full
    /// clustering, Lloyd iterations from the previous centers otherwise.
    fn recluster_all(&mut self) -> Result<()> {
        let points: Vec<&[f64]> = self.users.iter().map(|u| u.stats.means.as_slice()).collect();
        let n = self.config.n_types;
        let warm = match &self.clusters {
            Some(prev) => Some(lloyd(&points, prev.centers.clone(), DEFAULT_MAX_ITERS)?),
            None => None,
        };
        let model = if warm.is_none() || self.users.len() > self.users_at_last_full_clustering {
            self.users_at_last_full_clustering = self.users.len();
            let fresh = kmeans_with_rng(
                &points,
                n,
                &mut self.cluster_rng,
                DEFAULT_MAX_ITERS,
                KMEANS_RESTARTS,
            )?;
            match warm {
                Some(w) if w.inertia <= fresh.inertia => w,
                _ => fresh,
            }
        } else {
            warm.expect("checked above")
        };
        self.clusters = Some(model);
        Ok(())
    }

    fn recluster_pilots(&mut self) -> Result<()> {
        let points: Vec<&[f64]> = self
            .pilot_set
            .iter()
            .map(|id| self.users[self.index[id]].stats.means.as_slice())
            .collect();
        let model = kmeans_with_rng(
            &points,
            self.config.n_types,
            &mut self.cluster_rng,
            DEFAULT_MAX_ITERS,
            KMEANS_RESTARTS,
        )?;
        let rows = model
            .centers
            .into_iter()
            .map(|c| c.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
            .collect();
        self.set_estimated_params(ParameterSet::new(rows)?)
    }

    /// Records the reward; a pilot reward after the pilot set is full triggers
    /// reclustering of the pilots.
    pub fn reward_update(&mut self, user: UserId, arm: usize, reward: u8) -> Result<()> {
        let &i = self.index.get(&user).ok_or(Error::UnknownUser(user))?;
        self.users[i].stats.record(arm, reward)?;
        let explore = matches!(self.kind, ClusteredKind::UnifExplore | ClusteredKind::UcbExplore);
        if explore && self.users[i].is_pilot && self.pilot_set.len() >= self.config.m0 {
            self.recluster_pilots()?;
        }
        Ok(())
    }
}

impl Policy for ClusteredState {
    fn select(&mut self, slot: &Slot) -> Result<usize> {
        self.step(slot.user)
    }

    fn update(&mut self, slot: &Slot, arm: usize, reward: u8) -> Result<()> {
        self.reward_update(slot.user, arm, reward)
    }
}

/// Independent UCB learner per user, optionally restricted to an arm subset.
pub struct PerUserUcb {
    n_arms: usize,
    subset: Option<Vec<usize>>,
    users: HashMap<UserId, ArmStats>,
}

impl PerUserUcb {
    pub fn new(n_arms: usize, subset: Option<Vec<usize>>) -> Self {
        Self {
            n_arms,
            subset,
            users: HashMap::new(),
        }
    }

    pub fn stats(&self, user: UserId) -> Option<&ArmStats> {
        self.users.get(&user)
    }
}

impl Policy for PerUserUcb {
    fn select(&mut self, slot: &Slot) -> Result<usize> {
        let k = self.n_arms;
        let stats = self.users.entry(slot.user).or_insert_with(|| ArmStats::new(k));
        ucb_step(stats, self.subset.as_deref())
    }

    fn update(&mut self, slot: &Slot, arm: usize, reward: u8) -> Result<()> {
        self.users
            .get_mut(&slot.user)
            .ok_or(Error::UnknownUser(slot.user))?
            .record(arm, reward)
    }
}

/// UCB on statistics pooled over all users of the same (known) type.
pub struct UcbOnTypes {
    types: HashMap<UserId, usize>,
    per_type: Vec<ArmStats>,
}

impl UcbOnTypes {
    pub fn new(n_types: usize, n_arms: usize) -> Self {
        Self {
            types: HashMap::new(),
            per_type: vec![ArmStats::new(n_arms); n_types],
        }
    }

    pub fn register(&mut self, user: UserId, x: usize) -> Result<()> {
        if x >= self.per_type.len() {
            return Err(Error::TypeOutOfRange {
                x,
                n_types: self.per_type.len(),
            });
        }
        self.types.insert(user, x);
        Ok(())
    }

    pub fn type_stats(&self, x: usize) -> Option<&ArmStats> {
        self.per_type.get(x)
    }

    pub fn ucb_on_types_step(&self, user: UserId) -> Result<usize> {
        let &x = self.types.get(&user).ok_or(Error::MissingType(user))?;
        ucb_step(&self.per_type[x], None)
    }

    pub fn record(&mut self, user: UserId, arm: usize, reward: u8) -> Result<()> {
        let &x = self.types.get(&user).ok_or(Error::MissingType(user))?;
        self.per_type[x].record(arm, reward)
    }
}

impl Policy for UcbOnTypes {
    fn select(&mut self, slot: &Slot) -> Result<usize> {
        if !self.types.contains_key(&slot.user) {
            self.register(slot.user, slot.true_type)?;
        }
        self.ucb_on_types_step(slot.user)
    }

    fn update(&mut self, slot: &Slot, arm: usize, reward: u8) -> Result<()> {
        self.record(slot.user, arm, reward)
    }
}
