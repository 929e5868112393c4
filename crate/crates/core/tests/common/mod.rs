//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls the structural code under test.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for a in 1..row.len() {
        if row[a] > row[best] {
            best = a;
        }
    }
    best
}

pub fn unique_max(row: &[f64]) -> bool {
    let m = row.iter().cloned().fold(f64::MIN, f64::max);
    row.iter().filter(|&&v| v == m).count() == 1
}

/// Random N×K matrix on the grid `step·{lo..=hi}` with unique row maxima.
pub fn grid_instance<R: Rng>(rng: &mut R, n: usize, k: usize, step: f64, lo: u32, hi: u32) -> Vec<Vec<f64>> {
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..k).map(|_| rng.random_range(lo..=hi) as f64 * step).collect())
            .collect();
        if rows.iter().all(|r| unique_max(r)) {
            return rows;
        }
    }
}

/// Literal B(x): z with θ_z(a*_x) = θ_x(a*_x) and a*_z ≠ a*_x.
pub fn brute_b(theta: &[Vec<f64>], x: usize) -> Vec<usize> {
    let ax = argmax(&theta[x]);
    let mut out = Vec::new();
    for z in 0..theta.len() {
        if z != x && theta[z][ax] == theta[x][ax] && argmax(&theta[z]) != ax {
            out.push(z);
        }
    }
    out
}

/// Literal B(x, δ) as a scan over (z, a', a) triples.
pub fn brute_b_delta(theta: &[Vec<f64>], x: usize, delta: f64) -> Vec<usize> {
    let k = theta[x].len();
    let sup = theta[x].iter().cloned().fold(f64::MIN, f64::max);
    let mut out = Vec::new();
    for z in 0..theta.len() {
        if z == x {
            continue;
        }
        let mut member = false;
        for ap in 0..k {
            if !(theta[x][ap] >= sup - 2.0 * delta) {
                continue;
            }
            if !((theta[z][ap] - theta[x][ap]).abs() <= 2.0 * delta) {
                continue;
            }
            for a in 0..k {
                if a != ap && theta[z][a] > theta[z][ap] - 2.0 * delta {
                    member = true;
                }
            }
        }
        if member {
            out.push(z);
        }
    }
    out
}

/// Half the smallest gap between distinct entries; 0.5 when all are equal.
pub fn brute_epsilon_star(theta: &[Vec<f64>]) -> f64 {
    let mut vals: Vec<f64> = theta.iter().flatten().cloned().collect();
    let mut best = f64::INFINITY;
    for i in 0..vals.len() {
        for j in 0..vals.len() {
            if vals[i] != vals[j] {
                best = best.min((vals[i] - vals[j]).abs());
            }
        }
    }
    vals.clear();
    if best.is_finite() {
        best / 2.0
    } else {
        0.5
    }
}

/// Line-by-line transcription of the known-type learner's pseudo-code with
/// 1-indexed time and arms. `tape[t-1][arm]` is the reward if `arm` is pulled
/// at time `t`. The UCB term uses the learner's pull count so far, `t - 1`.
pub fn algorithm1(theta: &[Vec<f64>], tape: &[Vec<u8>]) -> Vec<usize> {
    let n = theta.len();
    let k = theta[0].len();
    let eps = brute_epsilon_star(theta);
    let a_star: Vec<usize> = (0..n).map(|x| argmax(&theta[x]) + 1).collect();
    let b_empty: Vec<bool> = (0..n).map(|x| brute_b(theta, x).is_empty()).collect();
    let mut elite: Vec<usize> = a_star.clone();
    elite.sort();
    elite.dedup();

    let mut pulls = vec![0u64; k + 1];
    let mut sums = vec![0u64; k + 1];
    let mut played = Vec::with_capacity(tape.len());
    for t in 1..=tape.len() {
        let i_t = if t <= k {
            t
        } else {
            let bar = |a: usize| sums[a] as f64 / pulls[a] as f64;
            let near = |x: usize| (1..=k).all(|a| (bar(a) - theta[x][a - 1]).abs() < eps);
            if let Some(x) = (0..n).find(|&x| near(x) && b_empty[x]) {
                a_star[x]
            } else if (0..n).any(|x| near(x) && !b_empty[x]) {
                let steps = (t - 1) as f64;
                let mut best = elite[0];
                let mut best_val = f64::MIN;
                for &a in &elite {
                    let v = bar(a) + (2.0 * steps.ln() / pulls[a] as f64).sqrt();
                    if v > best_val {
                        best_val = v;
                        best = a;
                    }
                }
                best
            } else {
                ((t - 1) % k) + 1
            }
        };
        pulls[i_t] += 1;
        sums[i_t] += u64::from(tape[t - 1][i_t - 1]);
        played.push(i_t - 1);
    }
    played
}

/// Bernoulli reward tape for true row `row`.
pub fn reward_tape(row: &[f64], len: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| row.iter().map(|&p| u8::from(rng.random::<f64>() < p)).collect())
        .collect()
}

pub fn kl(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Grid search over allocations on the suboptimal arms of `x` with
/// resolution `step`, minimising `max_z Σα·Δ / Σα·KL(θ_x‖θ_z)`.
pub fn grid_eq1(theta: &[Vec<f64>], x: usize, step: f64) -> f64 {
    let best = argmax(&theta[x]);
    let top = theta[x][best];
    let arms: Vec<usize> = (0..theta[x].len()).filter(|&a| a != best).collect();
    let confusers = brute_b(theta, x);
    let units = (1.0 / step).round() as usize;
    let mut best_value = f64::INFINITY;
    let mut alloc = vec![0usize; arms.len()];
    simplex_points(units, 0, &mut alloc, &mut |w| {
        let alpha: Vec<f64> = w.iter().map(|&u| u as f64 / units as f64).collect();
        let num: f64 = arms.iter().zip(&alpha).map(|(&a, al)| al * (top - theta[x][a])).sum();
        let mut worst: f64 = 0.0;
        for &z in &confusers {
            let den: f64 = arms.iter().zip(&alpha).map(|(&a, al)| al * kl(theta[x][a], theta[z][a])).sum();
            worst = worst.max(if den > 0.0 { num / den } else { f64::INFINITY });
        }
        best_value = best_value.min(worst);
    });
    best_value
}

fn simplex_points(remaining: usize, i: usize, w: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if i + 1 == w.len() {
        w[i] = remaining;
        f(w);
        return;
    }
    for u in 0..=remaining {
        w[i] = u;
        simplex_points(remaining - u, i + 1, w, f);
    }
}
