use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Running pull counts and empirical means for one learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    pub t: u64,
    pub counts: Vec<u64>,
    pub sums: Vec<u64>,
    /// `sums / counts`, 0 for unpulled arms.
    pub means: Vec<f64>,
}

impl ArmStats {
    pub fn new(n_arms: usize) -> Self {
        Self {
            t: 0,
            counts: vec![0; n_arms],
            sums: vec![0; n_arms],
            means: vec![0.0; n_arms],
        }
    }

    /// Rebuilds stats from raw counts and sums (`t` is their total count).
    pub fn from_counts(counts: Vec<u64>, sums: Vec<u64>) -> Result<Self> {
        if counts.len() != sums.len() {
            return Err(Error::LengthMismatch {
                expected: counts.len(),
                got: sums.len(),
            });
        }
        if let Some(a) = (0..counts.len()).find(|&a| sums[a] > counts[a]) {
            return Err(Error::InvalidArgument(format!(
                "arm {a} has more successes than pulls"
            )));
        }
        let means = counts
            .iter()
            .zip(&sums)
            .map(|(&c, &s)| if c == 0 { 0.0 } else { s as f64 / c as f64 })
            .collect();
        Ok(Self {
            t: counts.iter().sum(),
            counts,
            sums,
            means,
        })
    }

    pub fn n_arms(&self) -> usize {
        self.counts.len()
    }

    pub fn record(&mut self, arm: usize, reward: u8) -> Result<()> {
        if arm >= self.counts.len() {
            return Err(Error::ArmOutOfRange {
                a: arm,
                n_arms: self.counts.len(),
            });
        }
        if reward > 1 {
            return Err(Error::InvalidReward(reward));
        }
        self.t += 1;
        self.counts[arm] += 1;
        self.sums[arm] += u64::from(reward);
        self.means[arm] = self.sums[arm] as f64 / self.counts[arm] as f64;
        Ok(())
    }

    pub fn pulled_all(&self) -> bool {
        self.counts.iter().all(|&c| c > 0)
    }

    /// Adds another learner's counts and sums into this one.
    pub fn absorb(&mut self, other: &ArmStats) {
        for a in 0..self.counts.len() {
            self.counts[a] += other.counts[a];
            self.sums[a] += other.sums[a];
        }
        self.t += other.t;
        for a in 0..self.counts.len() {
            self.means[a] = if self.counts[a] == 0 {
                0.0
            } else {
                self.sums[a] as f64 / self.counts[a] as f64
            };
        }
    }
}
