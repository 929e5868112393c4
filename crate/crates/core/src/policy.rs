//! Single-learner arm selection: UCB (optionally on an arm subset) and the
//! known-type family built on condition classification.
//!
//! The known-type selector is one implementation with three uses:
//! exact confusion sets (`delta == 0`), widened sets (`delta > 0`), and the
//! same widened sets evaluated on an estimated parameter set.

use crate::error::{Error, Result};
use crate::params::{
    classify_against, confusion_set, derive_structure, derive_structure_lenient, Condition,
    DerivedStructure, ParameterSet,
};
use crate::stats::ArmStats;

/// `mean + sqrt(2 ln t / count)`.
///
/// `t` is the learner's own number of completed pulls.
pub fn ucb_index(mean: f64, count: u64, t: u64) -> Result<f64> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "UCB index of an unpulled arm".into(),
        ));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("UCB index at t = 0".into()));
    }
    Ok(mean + (2.0 * (t as f64).ln() / count as f64).sqrt())
}

/// Argmax of the UCB index over `subset`, lowest index on ties.
pub fn ucb_select(stats: &ArmStats, subset: &[usize]) -> Result<usize> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut best: Option<(usize, f64)> = None;
    let mut arms = subset.to_vec();
    arms.sort_unstable();
    for a in arms {
        if a >= stats.n_arms() {
            return Err(Error::ArmOutOfRange {
                a,
                n_arms: stats.n_arms(),
            });
        }
        if stats.counts[a] == 0 {
            return Err(Error::UnpulledArm(a));
        }
        let index = ucb_index(stats.means[a], stats.counts[a], stats.t)?;
        if best.is_none_or(|(_, b)| index > b) {
            best = Some((a, index));
        }
    }
    Ok(best.map(|(a, _)| a).expect("subset is non-empty"))
}

/// One UCB step with the standard initialisation: the lowest-index unpulled
/// arm of `subset` (all arms when `None`) is pulled first.
pub fn ucb_step(stats: &ArmStats, subset: Option<&[usize]>) -> Result<usize> {
    match subset {
        Some(arms) => {
            if let Some(&a) = arms.iter().filter(|&&a| a < stats.n_arms()).find(|&&a| stats.counts[a] == 0) {
                return Ok(a);
            }
            ucb_select(stats, arms)
        }
        None => {
            if let Some(a) = stats.counts.iter().position(|&c| c == 0) {
                return Ok(a);
            }
            let all: Vec<usize> = (0..stats.n_arms()).collect();
            ucb_select(stats, &all)
        }
    }
}

/// Reference parameter set and the structure a known-type learner needs.
#[derive(Debug, Clone)]
pub struct KtPolicyConfig {
    pub reference_params: ParameterSet,
    pub derived: DerivedStructure,
    pub delta: f64,
    pub epsilon_star: f64,
    /// Emptiness of the confusion set in use (B(x) or B(x, δ)) per type.
    pub confusion_nonempty: Vec<bool>,
}

impl KtPolicyConfig {
    /// Exact parameters: ε* from [`derive_structure`], optima must be unique.
    pub fn exact(params: ParameterSet, delta: f64) -> Result<Self> {
        let derived = derive_structure(&params)?;
        let eps = derived.epsilon_star;
        Self::with_epsilon(params, derived, delta, eps)
    }

    /// Estimated parameters: ties resolve to the lowest arm and ε* is the
    /// estimated set's own radius, floored at `delta`.
    pub fn estimated(params: ParameterSet, delta: f64) -> Result<Self> {
        let derived = derive_structure_lenient(&params);
        let eps = derived.epsilon_star.max(delta);
        Self::with_epsilon(params, derived, delta, eps)
    }

    pub fn with_epsilon(
        params: ParameterSet,
        derived: DerivedStructure,
        delta: f64,
        epsilon_star: f64,
    ) -> Result<Self> {
        if !(epsilon_star > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon_star must be positive, got {epsilon_star}"
            )));
        }
        let confusion_nonempty = (0..params.n_types())
            .map(|x| confusion_set(&params, x, delta).map(|b| !b.is_empty()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            reference_params: params,
            derived,
            delta,
            epsilon_star,
            confusion_nonempty,
        })
    }

    pub fn n_arms(&self) -> usize {
        self.reference_params.n_arms()
    }
}

/// One known-type step: initial sweep, then the optimal arm of a C1 match,
/// UCB over the elite arms on a C2 match, and round-robin otherwise.
pub fn kt_select(stats: &ArmStats, config: &KtPolicyConfig) -> Result<usize> {
    let k = config.n_arms();
    if stats.n_arms() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            got: stats.n_arms(),
        });
    }
    if stats.t < k as u64 {
        return Ok(stats.t as usize);
    }
    let verdict = classify_against(
        &config.reference_params,
        config.epsilon_star,
        &config.confusion_nonempty,
        &stats.means,
        stats.pulled_all(),
    )?;
    match (verdict.tag, verdict.matched_type) {
        (Condition::C1, Some(x)) => Ok(config.derived.best_arm[x]),
        (Condition::C2, Some(_)) => ucb_select(stats, &config.derived.elite),
        _ => Ok(round_robin(stats.t, k)),
    }
}

/// Cyclic arm for a learner that has completed `t` pulls.
pub fn round_robin(t: u64, n_arms: usize) -> usize {
    (t % n_arms as u64) as usize
}
