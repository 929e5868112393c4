//! Fixtures shared by the benchmarks.

use clusterbandit::presets::fig2_parameter_set;
use clusterbandit::{ArmStats, ParameterSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Empirical mean vectors of `users` users, each pulling every arm of the
/// two-type set uniformly `tau` times.
pub fn pilot_points(users: usize, tau: usize, seed: u64) -> Vec<Vec<f64>> {
    let params = fig2_parameter_set();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..users)
        .map(|_| {
            let x = rng.random_range(0..params.n_types());
            sample_stats(&params, x, tau, &mut rng).means
        })
        .collect()
}

/// Stats after `pulls` uniform pulls of type `x`.
pub fn sample_stats<R: Rng>(params: &ParameterSet, x: usize, pulls: usize, rng: &mut R) -> ArmStats {
    let mut stats = ArmStats::new(params.n_arms());
    for _ in 0..pulls {
        let a = rng.random_range(0..params.n_arms());
        let r = u8::from(rng.random::<f64>() < params.mean(x, a));
        stats.record(a, r).expect("arm in range");
    }
    stats
}
