use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use clusterbandit::bounds::{eq1_report, lemma1_report, thm1_bound, thm3_bound, BoundReport};
use clusterbandit::clustering::estimate_g;
use clusterbandit::harness::{self, ExperimentConfig, Setting};
use clusterbandit::presets::{preset_fig1, preset_fig2, FIG1_HORIZON};
use clusterbandit::ParameterSet;

#[derive(Parser)]
#[command(name = "clusterbandit", version, about = "Known-type and clustered bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write every step of every replication to trace.csv.
        #[arg(long)]
        full_trace: bool,
    },
    /// Single-user experiment with 21 types and 21 arms.
    Fig1 {
        #[arg(long, default_value_t = FIG1_HORIZON)]
        horizon: u64,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long, default_value = "out/fig1")]
        out: PathBuf,
    },
    /// 2000 arriving users over two types and four arms.
    Fig2 {
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long, default_value = "out/fig2")]
        out: PathBuf,
    },
    /// Evaluate a regret bound and print it as JSON.
    Bounds {
        /// Experiment config or any JSON object with a `parameter_set`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long = "type")]
        true_type: Option<usize>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        m0: Option<usize>,
        #[arg(long)]
        tau: Option<usize>,
        /// Clustering failure probability; estimated by simulation if absent.
        #[arg(long)]
        g: Option<f64>,
        #[arg(long, default_value_t = 500)]
        g_reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for bounds.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Asymptotic log-coefficient lower bound for one type.
    LowerBound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "type")]
        true_type: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Lemma1,
    Thm1,
    Thm3,
    Eq1,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            parallelism,
            out,
            full_trace,
        } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::from_json(&text).with_context(|| config.display().to_string())?;
            let title = config
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "experiment".into());
            run_and_write(&cfg, parallelism, &out, full_trace, &title)
        }
        Command::Fig1 {
            horizon,
            runs,
            parallelism,
            out,
        } => {
            let mut cfg = preset_fig1(horizon);
            if let Some(r) = runs {
                cfg.runs = r;
            }
            run_and_write(&cfg, parallelism, &out, false, "fig1")
        }
        Command::Fig2 { runs, parallelism, out } => {
            let mut cfg = preset_fig2();
            if let Some(r) = runs {
                cfg.runs = r;
            }
            run_and_write(&cfg, parallelism, &out, false, "fig2")
        }
        Command::Bounds {
            config,
            kind,
            true_type,
            horizon,
            delta,
            epsilon,
            m0,
            tau,
            g,
            g_reps,
            seed,
            out,
        } => {
            let report = match kind {
                Kind::Lemma1 => lemma1_report(epsilon.context("--epsilon is required for lemma1")?)?,
                Kind::Thm1 => {
                    let (params, exp) = load_params(config.as_deref())?;
                    let x = true_type.context("--type is required for thm1")?;
                    let horizon = horizon
                        .or(exp.as_ref().map(ExperimentConfig::horizon))
                        .context("--horizon is required")?;
                    thm1_bound(&params, x, horizon, delta.unwrap_or(0.0))?
                }
                Kind::Thm3 => {
                    let (params, exp) = load_params(config.as_deref())?;
                    let arrival = exp.as_ref().and_then(|c| match &c.setting {
                        Setting::Arrival(a) => Some(a.clone()),
                        Setting::SingleUser(_) => None,
                    });
                    let tau = tau
                        .or(arrival.as_ref().map(|a| a.tau))
                        .context("--tau is required")?;
                    let m0 = m0.context("--m0 is required for thm3")?;
                    let delta = delta.context("--delta is required for thm3")?;
                    let horizon = horizon
                        .or(exp.as_ref().map(ExperimentConfig::horizon))
                        .context("--horizon is required")?;
                    let g = match g {
                        Some(g) => g,
                        None => estimate_g(&params, delta, m0, tau, g_reps, seed)?,
                    };
                    thm3_bound(&params, m0, tau, delta, g, horizon)?
                }
                Kind::Eq1 => {
                    let (params, _) = load_params(config.as_deref())?;
                    eq1_report(&params, true_type.context("--type is required for eq1")?)?
                }
            };
            emit(&report, out.as_deref())
        }
        Command::LowerBound {
            config,
            true_type,
            out,
        } => {
            let (params, _) = load_params(Some(&config))?;
            emit(&eq1_report(&params, true_type)?, out.as_deref())
        }
    }
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn run_and_write(
    cfg: &ExperimentConfig,
    parallelism: Option<usize>,
    out: &Path,
    full_trace: bool,
    title: &str,
) -> Result<()> {
    let parallelism = parallelism.unwrap_or_else(default_parallelism);
    if parallelism == 0 {
        bail!("--parallelism must be at least 1");
    }
    let start = Instant::now();
    let result = harness::run(cfg, parallelism, full_trace)?;
    harness::write_artifacts(out, &result.curve, title)?;
    if full_trace {
        let labels: Vec<&str> = cfg.algorithms.iter().map(|a| a.label()).collect();
        fs::write(out.join("trace.csv"), harness::render_trace_csv(&labels, &result.traces))?;
    }
    for name in result.curve.algorithms() {
        if let Some(p) = result.curve.last(name) {
            println!(
                "{name:<28} t={:<8} regret={:>12} ± {}",
                p.t,
                harness::format_sig6(p.mean_regret),
                harness::format_sig6(p.stderr)
            );
        }
    }
    eprintln!(
        "wrote {} in {:.1}s",
        out.join("regret.csv").display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

/// Accepts a full experiment config or any object holding `parameter_set`.
fn load_params(path: Option<&Path>) -> Result<(ParameterSet, Option<ExperimentConfig>)> {
    let path = path.context("--config is required")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(cfg) = ExperimentConfig::from_json(&text) {
        return Ok((cfg.parameter_set.clone(), Some(cfg)));
    }
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| path.display().to_string())?;
    let params = value
        .get("parameter_set")
        .cloned()
        .context("config has no `parameter_set`")?;
    let params: ParameterSet = serde_json::from_value(params).context("invalid `parameter_set`")?;
    Ok((params, None))
}

fn emit(report: &BoundReport, out: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    println!("{json}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("bounds.json"), format!("{json}\n"))?;
    }
    Ok(())
}
