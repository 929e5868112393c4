//! k-means over users' empirical reward vectors, bottleneck matching of
//! cluster centers to the true parameter rows, and a Monte Carlo estimate of
//! how often clustering misses the true centers.

mod kmeans;
mod matching;

pub use kmeans::{kmeans, kmeans_with_rng, lloyd, ClusterModel, KMEANS_RESTARTS};
pub use matching::{match_clusters, MatchResult, MAX_MATCH_CLUSTERS};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::ParameterSet;
use crate::stats::ArmStats;

/// Lloyd iteration cap used by the experiment code.
pub const DEFAULT_MAX_ITERS: usize = 100;

/// Fraction of `reps` replications in which clustering `m0` uniformly
/// exploring users (`tau` pulls each, types uniform) leaves some center at
/// least `delta` away from its matched true row.
///
/// Replication `r` is seeded with `seed + r`, so results do not depend on
/// how replications are scheduled.
pub fn estimate_g(
    truth: &ParameterSet,
    delta: f64,
    m0: usize,
    tau: usize,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if tau < truth.n_arms() {
        return Err(Error::InvalidArgument(format!(
            "tau ({tau}) must be at least the number of arms ({})",
            truth.n_arms()
        )));
    }
    if m0 < truth.n_types() {
        return Err(Error::TooFewPoints {
            points: m0,
            clusters: truth.n_types(),
        });
    }
    let misses = (0..reps)
        .into_par_iter()
        .map(|r| pilot_clustering_deviation(truth, m0, tau, seed.wrapping_add(r as u64)))
        .map(|dev| dev.map(|d| usize::from(d >= delta)))
        .collect::<Result<Vec<_>>>()?;
    Ok(misses.iter().sum::<usize>() as f64 / reps as f64)
}

/// One replication: bottleneck deviation of clustered uniform pilots.
pub fn pilot_clustering_deviation(
    truth: &ParameterSet,
    m0: usize,
    tau: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, k) = (truth.n_types(), truth.n_arms());
    let vectors: Vec<Vec<f64>> = (0..m0)
        .map(|_| {
            let x = rng.random_range(0..n);
            let mut stats = ArmStats::new(k);
            for _ in 0..tau {
                let a = rng.random_range(0..k);
                let reward = u8::from(rng.random::<f64>() < truth.mean(x, a));
                stats.record(a, reward).expect("valid arm and reward");
            }
            stats.means
        })
        .collect();
    let model = kmeans(&vectors, n, rng.random(), DEFAULT_MAX_ITERS)?;
    Ok(match_clusters(&model.centers, truth)?.max_deviation)
}
