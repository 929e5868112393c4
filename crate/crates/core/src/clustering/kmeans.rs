use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Number of k-means++ restarts; the lowest-inertia result is kept.
pub const KMEANS_RESTARTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub centers: Vec<Vec<f64>>,
    /// Cluster index of each input point, in input order.
    pub assignment: Vec<usize>,
    /// Sum of squared distances to the assigned centers.
    pub inertia: f64,
}

impl ClusterModel {
    /// Index of the center nearest to `point` (lowest index on ties).
    pub fn nearest(&self, point: &[f64]) -> usize {
        nearest_center(&self.centers, point).0
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest_center(centers: &[Vec<f64>], point: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(center, point);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn check_points<P: AsRef<[f64]>>(points: &[P], n_clusters: usize) -> Result<usize> {
    if n_clusters == 0 {
        return Err(Error::InvalidArgument("n_clusters must be at least 1".into()));
    }
    if points.len() < n_clusters {
        return Err(Error::TooFewPoints {
            points: points.len(),
            clusters: n_clusters,
        });
    }
    let dim = points[0].as_ref().len();
    if let Some(p) = points.iter().find(|p| p.as_ref().len() != dim) {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: p.as_ref().len(),
        });
    }
    Ok(dim)
}

/// Lloyd's algorithm with k-means++ seeding and [`KMEANS_RESTARTS`] restarts,
/// deterministic in `seed`.
pub fn kmeans<P: AsRef<[f64]>>(
    points: &[P],
    n_clusters: usize,
    seed: u64,
    max_iters: usize,
) -> Result<ClusterModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    kmeans_with_rng(points, n_clusters, &mut rng, max_iters, KMEANS_RESTARTS)
}

pub fn kmeans_with_rng<P: AsRef<[f64]>, R: Rng + ?Sized>(
    points: &[P],
    n_clusters: usize,
    rng: &mut R,
    max_iters: usize,
    restarts: usize,
) -> Result<ClusterModel> {
    check_points(points, n_clusters)?;
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    let mut best: Option<ClusterModel> = None;
    for _ in 0..restarts.max(1) {
        let init = kmeans_plus_plus(points, n_clusters, rng);
        let model = lloyd_unchecked(points, init, max_iters);
        if best.as_ref().is_none_or(|b| model.inertia < b.inertia) {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Lloyd iterations from given initial centers.
pub fn lloyd<P: AsRef<[f64]>>(
    points: &[P],
    initial_centers: Vec<Vec<f64>>,
    max_iters: usize,
) -> Result<ClusterModel> {
    let dim = check_points(points, initial_centers.len())?;
    if initial_centers.iter().any(|c| c.len() != dim) {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: initial_centers.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0),
        });
    }
    Ok(lloyd_unchecked(points, initial_centers, max_iters.max(1)))
}

fn kmeans_plus_plus<P: AsRef<[f64]>, R: Rng + ?Sized>(
    points: &[P],
    n_clusters: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = Vec::with_capacity(n_clusters);
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    centers.push(points[first].as_ref().to_vec());
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p.as_ref(), &centers[0]))
        .collect();
    while centers.len() < n_clusters {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // every point coincides with a center: take any unused one
            let unused: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            unused[rng.random_range(0..unused.len())]
        };
        chosen[pick] = true;
        let center = points[pick].as_ref().to_vec();
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(sq_dist(p.as_ref(), &center));
        }
        centers.push(center);
    }
    centers
}

fn assign<P: AsRef<[f64]>>(points: &[P], centers: &[Vec<f64>], assignment: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (slot, p) in assignment.iter_mut().zip(points) {
        let (c, d) = nearest_center(centers, p.as_ref());
        *slot = c;
        inertia += d;
    }
    inertia
}

fn lloyd_unchecked<P: AsRef<[f64]>>(
    points: &[P],
    mut centers: Vec<Vec<f64>>,
    max_iters: usize,
) -> ClusterModel {
    let n_clusters = centers.len();
    let dim = centers[0].len();
    let mut assignment = vec![usize::MAX; points.len()];
    let mut next = vec![0; points.len()];
    let mut inertia = assign(points, &centers, &mut next);
    let mut sums = vec![0.0; n_clusters * dim];
    let mut sizes = vec![0usize; n_clusters];
    for _ in 0..max_iters {
        if next == assignment {
            break;
        }
        std::mem::swap(&mut assignment, &mut next);

        sums.iter_mut().for_each(|s| *s = 0.0);
        sizes.iter_mut().for_each(|s| *s = 0);
        for (p, &c) in points.iter().zip(&assignment) {
            sizes[c] += 1;
            for (s, v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(p.as_ref()) {
                *s += v;
            }
        }
        for (c, center) in centers.iter_mut().enumerate() {
            // empty clusters keep their previous center
            if sizes[c] > 0 {
                for (x, s) in center.iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
                    *x = s / sizes[c] as f64;
                }
            }
        }
        let updated = assign(points, &centers, &mut next);
        debug_assert!(
            updated <= inertia * (1.0 + 1e-12) + 1e-12,
            "inertia increased from {inertia} to {updated}"
        );
        inertia = updated;
    }
    ClusterModel {
        centers,
        assignment: next,
        inertia,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn separates_two_pairs() {
        let pts = vec![vec![0.0, 0.0], vec![0.0, 0.01], vec![1.0, 1.0], vec![1.0, 0.99]];
        let m = kmeans(&pts, 2, 7, 100).unwrap();
        assert_eq!(m.assignment[0], m.assignment[1]);
        assert_eq!(m.assignment[2], m.assignment[3]);
        assert_ne!(m.assignment[0], m.assignment[2]);
        let low = &m.centers[m.assignment[0]];
        let high = &m.centers[m.assignment[2]];
        assert_abs_diff_eq!(low[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(low[1], 0.005, epsilon = 1e-12);
        assert_abs_diff_eq!(high[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(high[1], 0.995, epsilon = 1e-12);
    }

    #[test]
    fn one_cluster_per_point() {
        let pts = vec![vec![0.1, 0.2], vec![0.5, 0.5], vec![0.9, 0.1]];
        let m = kmeans(&pts, 3, 1, 10).unwrap();
        assert_eq!(m.inertia, 0.0);
        let mut a = m.assignment.clone();
        a.sort_unstable();
        assert_eq!(a, vec![0, 1, 2]);
    }

    #[test]
    fn duplicate_points_share_cluster() {
        let pts = vec![vec![0.3, 0.3], vec![0.3, 0.3], vec![0.8, 0.1], vec![0.2, 0.9]];
        for seed in 0..20 {
            let m = kmeans(&pts, 3, seed, 50).unwrap();
            assert_eq!(m.assignment[0], m.assignment[1]);
        }
    }

    #[test]
    fn errors() {
        let pts = vec![vec![0.0]];
        assert!(matches!(
            kmeans(&pts, 2, 0, 10),
            Err(Error::TooFewPoints { points: 1, clusters: 2 })
        ));
        assert!(kmeans(&pts, 1, 0, 0).is_err());
    }

    #[test]
    fn deterministic_in_seed() {
        let pts: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i * 37 % 101) as f64 / 101.0, (i * 17 % 53) as f64 / 53.0])
            .collect();
        assert_eq!(kmeans(&pts, 3, 11, 100).unwrap(), kmeans(&pts, 3, 11, 100).unwrap());
    }

    #[test]
    fn warm_start_keeps_converged_centers() {
        let pts = vec![vec![0.0], vec![0.2], vec![1.0], vec![1.2]];
        let m = lloyd(&pts, vec![vec![0.1], vec![1.1]], 10).unwrap();
        assert_eq!(m.centers, vec![vec![0.1], vec![1.1]]);
        assert_abs_diff_eq!(m.inertia, 0.04, epsilon = 1e-12);
    }
}
