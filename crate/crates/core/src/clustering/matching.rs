use crate::error::{Error, Result};
use crate::params::ParameterSet;

pub const MAX_MATCH_CLUSTERS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// `permutation[c]` is the type matched to cluster `c`.
    pub permutation: Vec<usize>,
    /// Largest coordinate deviation between a center and its matched type.
    pub max_deviation: f64,
}

/// Exhaustive bottleneck matching of cluster centers to the true rows.
///
/// Permutations are visited in lexicographic order and only a strictly
/// smaller deviation replaces the incumbent, so ties resolve to the
/// lexicographically first permutation.
pub fn match_clusters<C: AsRef<[f64]>>(centers: &[C], truth: &ParameterSet) -> Result<MatchResult> {
    let n = truth.n_types();
    if centers.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: centers.len(),
        });
    }
    if let Some(c) = centers.iter().find(|c| c.as_ref().len() != truth.n_arms()) {
        return Err(Error::LengthMismatch {
            expected: truth.n_arms(),
            got: c.as_ref().len(),
        });
    }
    if n > MAX_MATCH_CLUSTERS {
        return Err(Error::MatchingTooLarge(n));
    }

    // cost[c][x] = max_a |center_c(a) − θ_x(a)|
    let cost: Vec<Vec<f64>> = centers
        .iter()
        .map(|c| {
            truth
                .rows()
                .map(|row| {
                    c.as_ref()
                        .iter()
                        .zip(row)
                        .map(|(u, v)| (u - v).abs())
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = MatchResult {
        max_deviation: bottleneck(&cost, &perm),
        permutation: perm.clone(),
    };
    while next_permutation(&mut perm) {
        let value = bottleneck(&cost, &perm);
        if value < best.max_deviation {
            best.max_deviation = value;
            best.permutation.copy_from_slice(&perm);
        }
    }
    Ok(best)
}

fn bottleneck(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter()
        .enumerate()
        .map(|(c, &x)| cost[c][x])
        .fold(0.0, f64::max)
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).expect("successor exists");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}
