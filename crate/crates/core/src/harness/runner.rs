use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::HarnessError;
use crate::env::{generate_arrivals, run_experiment, AlgorithmSpec, RunTrace, TraceOptions};
use crate::seeding::replication_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub t: u64,
    pub algorithm: String,
    pub mean_regret: f64,
    pub stderr: f64,
    pub runs: usize,
}

/// Mean cumulative regret per checkpoint, grouped by algorithm in config
/// order and ascending `t` within each group.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateCurve {
    pub points: Vec<CurvePoint>,
}

impl AggregateCurve {
    pub fn algorithms(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for p in &self.points {
            if names.last() != Some(&p.algorithm.as_str()) {
                names.push(&p.algorithm);
            }
        }
        names
    }

    pub fn series<'a>(&'a self, algorithm: &'a str) -> impl Iterator<Item = &'a CurvePoint> + 'a {
        self.points.iter().filter(move |p| p.algorithm == algorithm)
    }

    pub fn at(&self, algorithm: &str, t: u64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.algorithm == algorithm && p.t == t)
    }

    pub fn last(&self, algorithm: &str) -> Option<&CurvePoint> {
        self.points.iter().rfind(|p| p.algorithm == algorithm)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub curve: AggregateCurve,
    /// `traces[i][r]` is replication `r` of algorithm `i`.
    pub traces: Vec<Vec<RunTrace>>,
}

pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

/// Runs every (algorithm, replication) pair on a pool of `parallelism`
/// threads. Replication `r` uses seed `config.seed + r` for every algorithm,
/// so all algorithms see the same arrivals and reward tape.
pub fn run(config: &ExperimentConfig, parallelism: usize, full_trace: bool) -> Result<RunOutput, HarnessError> {
    let specs = config
        .algorithm_specs()
        .map_err(|message| HarnessError::Config { line: 1, message })?;
    let arrival = config.setting.arrival();
    arrival.validate()?;
    let options = TraceOptions {
        checkpoint_every: config.checkpoint_every,
        full_trace,
    };
    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|i| (0..config.runs).map(move |r| (i, r)))
        .collect();
    let total = jobs.len();
    let completed = AtomicUsize::new(0);
    let run_one = |(i, r): (usize, usize)| -> Result<RunTrace, HarnessError> {
        let spec: &AlgorithmSpec = &specs[i];
        let seed = replication_seed(config.seed, r);
        let outcome = catch_unwind(AssertUnwindSafe(|| {
            let arrivals = generate_arrivals(&arrival, seed)?;
            run_experiment(&config.parameter_set, &arrivals, spec, seed, options)
        }));
        match outcome {
            Ok(result) => {
                let trace = result?;
                completed.fetch_add(1, Ordering::Relaxed);
                Ok(trace)
            }
            Err(payload) => Err(HarnessError::Panicked {
                algorithm: config.algorithms[i].label().to_string(),
                run: r,
                message: panic_message(payload.as_ref()),
                completed: completed.load(Ordering::Relaxed),
                total,
            }),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let flat: Vec<RunTrace> = pool.install(|| {
        jobs.into_par_iter()
            .map(run_one)
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut traces: Vec<Vec<RunTrace>> = Vec::with_capacity(specs.len());
    let mut it = flat.into_iter();
    for _ in 0..specs.len() {
        traces.push(it.by_ref().take(config.runs).collect());
    }
    let curve = aggregate(config, &traces);
    Ok(RunOutput { curve, traces })
}

/// Ordered reduce over replications; independent of scheduling.
pub fn aggregate(config: &ExperimentConfig, traces: &[Vec<RunTrace>]) -> AggregateCurve {
    let mut points = Vec::new();
    for (entry, runs) in config.algorithms.iter().zip(traces) {
        let Some(first) = runs.first() else { continue };
        for (k, cp) in first.checkpoints.iter().enumerate() {
            let values: Vec<f64> = runs.iter().map(|tr| tr.checkpoints[k].cumulative_regret).collect();
            let (mean, se) = mean_and_stderr(&values);
            points.push(CurvePoint {
                t: cp.t,
                algorithm: entry.label().to_string(),
                mean_regret: mean,
                stderr: se,
                runs: runs.len(),
            });
        }
    }
    AggregateCurve { points }
}
