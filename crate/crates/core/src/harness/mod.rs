//! Replicated experiments: JSON configs, a parallel runner and CSV/SVG output.

mod config;
mod output;
mod runner;

pub use config::{
    AlgorithmEntry, AlgorithmParams, ExperimentConfig, Setting, SingleUserConfig, ALGORITHM_NAMES,
};
pub use output::{format_sig6, render_csv, render_svg, render_trace_csv, write_artifacts, CSV_HEADER};
pub use runner::{aggregate, mean_and_stderr, run, AggregateCurve, CurvePoint, RunOutput};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Simulation(#[from] crate::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(
        "replication {run} of `{algorithm}` panicked: {message} \
         (partial results: {completed} of {total} replications had finished; nothing was written)"
    )]
    Panicked {
        algorithm: String,
        run: usize,
        message: String,
        completed: usize,
        total: usize,
    },
}
