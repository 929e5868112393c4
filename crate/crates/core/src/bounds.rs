//! Numeric evaluators for the regret bounds.
//!
//! * [`gamma`]: expected last exit time of a Bernoulli running mean from an
//!   ε-band, bounded via Hoeffding.
//! * [`thm1_bound`]: upper bound for the known-type learner, constant when
//!   the confusion set is empty and logarithmic otherwise. The constant is
//!   assembled from per-arm pull bounds: every suboptimal arm contributes
//!   `Δ·(1 + (K+2)·γ(ε*))`, and each suboptimal elite arm adds `Δ·π²/3` in the
//!   non-empty case.
//! * [`thm3_bound`]: three-term bound for uniform exploration followed by
//!   clustering and the estimated-type learner.
//! * [`eq1_lower_bound`]: the asymptotic `ln T` coefficient lower bound,
//!   solved by bisection over a linear feasibility problem.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::kl::bernoulli_kl;
use crate::params::{confusion_set, derive_structure, ParameterSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lemma1,
    Thm1,
    Thm2,
    Thm3,
    Eq1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    /// `None` when the bound is infinite.
    pub value: Option<f64>,
    pub inputs: Map<String, Value>,
    pub terms: Vec<Term>,
}

impl BoundReport {
    fn from_terms(kind: BoundKind, inputs: Value, terms: Vec<(&str, f64)>) -> Self {
        let value = terms.iter().map(|(_, v)| v).sum();
        Self {
            kind,
            value: Some(value),
            inputs: match inputs {
                Value::Object(map) => map,
                _ => Map::new(),
            },
            terms: terms
                .into_iter()
                .map(|(name, value)| Term {
                    name: name.to_string(),
                    value,
                })
                .collect(),
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

/// `2e^{-2ε²} / (1 - e^{-2ε²})²`.
pub fn gamma(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let e = (-2.0 * epsilon * epsilon).exp();
    // 1 - e loses precision for tiny ε; -expm1 does not
    let one_minus = -(-2.0 * epsilon * epsilon).exp_m1();
    Ok(2.0 * e / (one_minus * one_minus))
}

pub fn lemma1_report(epsilon: f64) -> Result<BoundReport> {
    let g = gamma(epsilon)?;
    Ok(BoundReport::from_terms(
        BoundKind::Lemma1,
        json!({ "epsilon": epsilon }),
        vec![("gamma", g)],
    ))
}

/// Regret upper bound of the known-type learner with true type `x` at
/// horizon `horizon`, using B(x) when `delta == 0` and B(x, δ) otherwise.
pub fn thm1_bound(params: &ParameterSet, x: usize, horizon: u64, delta: f64) -> Result<BoundReport> {
    let derived = derive_structure(params)?;
    if x >= params.n_types() {
        return Err(Error::TypeOutOfRange {
            x,
            n_types: params.n_types(),
        });
    }
    let k = params.n_arms();
    if horizon < k as u64 {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} is shorter than the initial sweep over {k} arms"
        )));
    }
    let confusion = confusion_set(params, x, delta)?;
    let best = derived.best_arm[x];
    let g = gamma(derived.epsilon_star)?;
    let per_arm_pulls = 1.0 + (k as f64 + 2.0) * g;
    let suboptimal: f64 = (0..k)
        .filter(|&a| a != best)
        .map(|a| derived.gap(x, a) * per_arm_pulls)
        .sum();

    let kind = if delta == 0.0 { BoundKind::Thm1 } else { BoundKind::Thm2 };
    let inputs = json!({
        "type": x,
        "horizon": horizon,
        "delta": delta,
        "epsilon_star": derived.epsilon_star,
        "gamma_epsilon_star": g,
        "confusion_set": confusion,
    });
    if confusion.is_empty() {
        return Ok(BoundReport::from_terms(kind, inputs, vec![("suboptimal_pulls", suboptimal)]));
    }

    let elite_others: Vec<usize> = derived.elite.iter().copied().filter(|&a| a != best).collect();
    if let Some(&arm) = elite_others.iter().find(|&&a| derived.gap(x, a) == 0.0) {
        return Err(Error::DegenerateGap { x, arm });
    }
    let ln_t = (horizon as f64).ln();
    let log_term: f64 = elite_others.iter().map(|&a| 8.0 / derived.gap(x, a) * ln_t).sum();
    let ucb_constant: f64 = elite_others
        .iter()
        .map(|&a| std::f64::consts::PI.powi(2) / 3.0 * derived.gap(x, a))
        .sum();
    Ok(BoundReport::from_terms(
        kind,
        inputs,
        vec![
            ("log_term", log_term),
            ("suboptimal_pulls", suboptimal),
            ("elite_ucb_constant", ucb_constant),
        ],
    ))
}

/// Three-term bound for uniform exploration on `m0` users of `tau` slots,
/// clustering that misses by `delta` with probability `g_value`, then the
/// estimated-type learner (bounded by the known-type learner at `2·delta`).
pub fn thm3_bound(
    params: &ParameterSet,
    m0: usize,
    tau: usize,
    delta: f64,
    g_value: f64,
    horizon: u64,
) -> Result<BoundReport> {
    if !(0.0..=1.0).contains(&g_value) {
        return Err(Error::InvalidArgument(format!("g must lie in [0, 1], got {g_value}")));
    }
    if tau == 0 {
        return Err(Error::InvalidArgument("tau must be at least 1".into()));
    }
    let pilot_slots = (m0 * tau) as u64;
    if horizon < pilot_slots {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} is shorter than the pilot phase ({pilot_slots} slots)"
        )));
    }
    let derived = derive_structure(params)?;
    let (n, k) = (params.n_types() as f64, params.n_arms() as f64);
    let tau_f = tau as f64;

    let explore_per_user: f64 = (0..params.n_types())
        .map(|x| {
            (0..params.n_arms())
                .map(|a| derived.gap(x, a) * tau_f / k)
                .sum::<f64>()
                / n
        })
        .sum();
    let exploration = m0 as f64 * explore_per_user;

    let max_gap = derived.gaps.iter().copied().fold(0.0, f64::max);
    let clustering_failure = g_value * (horizon - pilot_slots) as f64 * max_gap;

    let per_type: Vec<f64> = (0..params.n_types())
        .map(|x| thm1_bound(params, x, tau as u64, 2.0 * delta).map(|r| r.value.unwrap_or(f64::INFINITY)))
        .collect::<Result<_>>()?;
    let mean_per_user: f64 = per_type.iter().map(|v| v / n).sum();
    let exploitation = (1.0 - g_value) * (horizon as f64 / tau_f - m0 as f64) * mean_per_user;

    Ok(BoundReport::from_terms(
        BoundKind::Thm3,
        json!({
            "m0": m0,
            "tau": tau,
            "delta": delta,
            "g": g_value,
            "horizon": horizon,
            "per_type_ucb_kt_2delta": per_type,
        }),
        vec![
            ("exploration", exploration),
            ("clustering_failure", clustering_failure),
            ("exploitation", exploitation),
        ],
    ))
}

/// Bisection tolerance of [`eq1_lower_bound`].
pub const EQ1_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum LowerBound {
    Finite(f64),
    /// Some confusable type cannot be told apart on any suboptimal arm.
    Unbounded,
}

impl LowerBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(*v),
            Self::Unbounded => None,
        }
    }
}

/// Gaps and KL rows of the lower-bound problem for type `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundProblem {
    /// Arms other than the optimal arm of `x`.
    pub arms: Vec<usize>,
    pub gaps: Vec<f64>,
    /// `divergences[i][j]` = KL of arm `arms[j]` between `x` and the `i`-th
    /// member of B(x).
    pub divergences: Vec<Vec<f64>>,
    pub confusion: Vec<usize>,
}

impl LowerBoundProblem {
    pub fn new(params: &ParameterSet, x: usize) -> Result<Self> {
        let derived = derive_structure(params)?;
        if x >= params.n_types() {
            return Err(Error::TypeOutOfRange {
                x,
                n_types: params.n_types(),
            });
        }
        let confusion = derived.confusion[x].clone();
        if confusion.is_empty() {
            return Err(Error::VacuousBound(x));
        }
        let best = derived.best_arm[x];
        let arms: Vec<usize> = (0..params.n_arms()).filter(|&a| a != best).collect();
        let gaps = arms.iter().map(|&a| derived.gap(x, a)).collect();
        let divergences = confusion
            .iter()
            .map(|&z| {
                arms.iter()
                    .map(|&a| bernoulli_kl(params.mean(x, a), params.mean(z, a)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            arms,
            gaps,
            divergences,
            confusion,
        })
    }

    /// `max_z Σα·Δ / Σα·I_z` for a given allocation.
    pub fn ratio(&self, alpha: &[f64]) -> f64 {
        let num: f64 = alpha.iter().zip(&self.gaps).map(|(a, d)| a * d).sum();
        self.divergences
            .iter()
            .map(|row| {
                let den: f64 = alpha.iter().zip(row).map(|(a, i)| a * i).sum();
                if den > 0.0 {
                    num / den
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    /// `min_α max_z Σα(Δ − c·I_z)` over the simplex. Non-positive iff some
    /// allocation achieves ratio at most `c`.
    pub fn game_value(&self, c: f64) -> Result<f64> {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let alpha: Vec<_> = self.arms.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
        let s = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
        for row in &self.divergences {
            let mut expr = LinearExpr::empty();
            for ((&var, &gap), &kl) in alpha.iter().zip(&self.gaps).zip(row) {
                expr.add(var, gap - c * kl);
            }
            expr.add(s, -1.0);
            lp.add_constraint(expr, ComparisonOp::Le, 0.0);
        }
        let mut simplex = LinearExpr::empty();
        for &var in &alpha {
            simplex.add(var, 1.0);
        }
        lp.add_constraint(simplex, ComparisonOp::Eq, 1.0);
        lp.solve()
            .map(|sol| sol.objective())
            .map_err(|e| Error::Solver(e.to_string()))
    }
}

/// `min_α max_{z ∈ B(x)} Σα(a)Δ_x(a) / Σα(a)I^a(x‖z)`, by bisection on the
/// value with an LP feasibility check, to absolute tolerance [`EQ1_TOLERANCE`].
pub fn eq1_lower_bound(params: &ParameterSet, x: usize) -> Result<LowerBound> {
    let problem = LowerBoundProblem::new(params, x)?;
    if problem.divergences.iter().any(|row| row.iter().all(|&i| i == 0.0)) {
        return Ok(LowerBound::Unbounded);
    }
    let feasible = |c: f64| problem.game_value(c).map(|v| v <= 1e-12);

    let ratio_cap = problem
        .divergences
        .iter()
        .flat_map(|row| {
            row.iter()
                .zip(&problem.gaps)
                .filter(|(&i, _)| i > 0.0)
                .map(|(i, d)| d / i)
        })
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    let mut hi = 10.0 * ratio_cap;
    let mut expansions = 0;
    while !feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Ok(LowerBound::Unbounded);
        }
    }
    while hi - lo > EQ1_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LowerBound::Finite(0.5 * (lo + hi)))
}

pub fn eq1_report(params: &ParameterSet, x: usize) -> Result<BoundReport> {
    let bound = eq1_lower_bound(params, x)?;
    let inputs = json!({ "type": x, "tolerance": EQ1_TOLERANCE });
    Ok(match bound {
        LowerBound::Finite(v) => BoundReport::from_terms(BoundKind::Eq1, inputs, vec![("log_coefficient", v)]),
        LowerBound::Unbounded => BoundReport {
            kind: BoundKind::Eq1,
            value: None,
            inputs: match inputs {
                Value::Object(m) => m,
                _ => Map::new(),
            },
            terms: Vec::new(),
        },
    })
}

/// Last time `n ≤ horizon` at which the running mean of Bernoulli(`mu`)
/// draws is at least `epsilon` away from `mu`; 0 if never.
pub fn last_exit_time<R: Rng + ?Sized>(mu: f64, epsilon: f64, horizon: usize, rng: &mut R) -> usize {
    let mut sum = 0u64;
    let mut last = 0;
    for n in 1..=horizon {
        sum += u64::from(rng.random::<f64>() < mu);
        if (sum as f64 / n as f64 - mu).abs() >= epsilon {
            last = n;
        }
    }
    last
}

/// Mean and standard error of [`last_exit_time`] over `reps` replications
/// (replication `r` seeded with `seed + r`).
pub fn lemma1_monte_carlo(
    mu: f64,
    epsilon: f64,
    horizon: usize,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if reps < 2 {
        return Err(Error::InvalidArgument("need at least two replications".into()));
    }
    let samples: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            last_exit_time(mu, epsilon, horizon, &mut rng) as f64
        })
        .collect();
    let n = reps as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}
