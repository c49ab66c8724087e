//! The `adaptive-inv` command line.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors (nothing is
//! written), 2 for failures while running.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::harness::{
    default_variations, robustness_sweep, run_experiment, run_policy, sensitivity_sweep,
    stationary_baseline_reference, PolicyKind,
};
use crate::learning::PosteriorState;
use crate::optimizer::{optimize, select_best, PolicyEvaluation, SamplingMode};
use crate::output::{
    read_trace_csv, write_plot_data, write_trace_csv, ComparisonReport, PlotKind, RunSummary,
};
use crate::policies::PolicyParams;
use crate::scenarios::{ScenarioKind, ScenarioSchedule};
use crate::stochastic::{RngStream, StreamId};
use crate::{Error, Result};

pub const SEED_ENV: &str = "ADAPTIVE_INV_SEED";

#[derive(Debug, Parser)]
#[command(name = "adaptive-inv", version, about = "Static vs Bayesian-adaptive (s,S) inventory experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one replication of one policy and write its trace.
    Run(RunArgs),
    /// Paired comparison of both policies over replications.
    Compare(CompareArgs),
    /// Turn trace files into plot-ready series.
    Plotdata(PlotArgs),
    /// Optimize (s,S) for a posterior concentrated at the stationary truth.
    OptimizeBaseline(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Config file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides `ADAPTIVE_INV_SEED` and the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: the config's `output_dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optimizer sampling mode: posterior|point.
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub scenario: Option<String>,
    /// static|adaptive
    #[arg(long, default_value = "static")]
    pub policy: String,
    #[arg(long, default_value_t = 0)]
    pub replication: u64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated scenarios (default: stationary,demand-shock,supply-disruption).
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Comma-separated shock rates for the magnitude sweep, e.g. 15,20,25.
    #[arg(long)]
    pub robustness: Option<String>,
    /// Also run the cost and update-period sensitivity grid.
    #[arg(long)]
    pub sensitivity: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// convergence|adaptation|performance
    #[arg(long)]
    pub kind: String,
    /// Trace CSV files; each becomes one series named after its file stem.
    #[arg(long = "trace", required = true, num_args = 1..)]
    pub traces: Vec<PathBuf>,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Scenarios per candidate (default: the config's `optimizer_samples`).
    #[arg(long)]
    pub samples: Option<u32>,
}

/// Failure classified for the exit code.
enum Failure {
    Config(Error),
    Runtime(Error),
}

fn config_err(e: Error) -> Failure {
    Failure::Config(e)
}

fn runtime(e: Error) -> Failure {
    if e.is_configuration() {
        Failure::Config(e)
    } else {
        Failure::Runtime(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Plotdata(a) => cmd_plotdata(a),
        Command::OptimizeBaseline(a) => cmd_optimize_baseline(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Loads the config and applies seed, mode and output overrides.
fn resolve(common: &CommonArgs) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    } else if let Ok(v) = std::env::var(SEED_ENV) {
        cfg.seed = v.trim().parse().map_err(|_| {
            Error::Configuration(format!("{SEED_ENV} must be an unsigned 64-bit integer, got `{v}`"))
        })?;
    }
    if let Some(mode) = &common.mode {
        cfg.experiment.adaptive.optimizer.mode = mode.parse::<SamplingMode>()?;
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

/// The config's own schedule when the name matches it, else the preset.
fn scenario_named(cfg: &RunConfig, name: &str) -> Result<ScenarioSchedule> {
    let kind: ScenarioKind = name.trim().parse()?;
    if kind == cfg.scenario.kind {
        return Ok(cfg.scenario.clone());
    }
    if kind == ScenarioKind::Custom {
        return Err(Error::Configuration(
            "scenario `custom` needs `scenario = custom` and segments in the config".into(),
        ));
    }
    Ok(ScenarioSchedule::preset(kind))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn cmd_run(a: RunArgs) -> std::result::Result<(), Failure> {
    let (cfg, out) = resolve(&a.common).map_err(config_err)?;
    let scenario = match &a.scenario {
        Some(name) => scenario_named(&cfg, name).map_err(config_err)?,
        None => cfg.scenario.clone(),
    };
    scenario.validate(cfg.experiment.horizon).map_err(config_err)?;
    let policy: PolicyKind = a.policy.parse().map_err(config_err)?;

    let run = run_policy(policy, &scenario, &cfg.experiment, cfg.seed, a.replication)
        .map_err(runtime)?;
    let summary = RunSummary {
        scenario: scenario.name().into(),
        policy: policy.as_str().into(),
        seed: cfg.seed,
        replication: a.replication,
        metrics: run.metrics,
        final_params: *run.controller.params(),
        final_posterior: run.controller.posterior().copied(),
        reoptimizations: run.controller.reoptimizations(),
    };

    std::fs::create_dir_all(&out).map_err(|e| runtime(e.into()))?;
    let stem = format!("{}_{}", scenario.name(), policy.as_str());
    let trace_path = out.join(format!("trace_{stem}.csv"));
    let summary_path = out.join(format!("summary_{stem}.json"));
    (|| -> Result<()> {
        let mut w = create(&trace_path)?;
        write_trace_csv(&mut w, &run.trace)?;
        w.flush()?;
        write_json(&summary_path, &summary)
    })()
    .map_err(runtime)?;

    let m = &summary.metrics;
    println!("scenario        {}", summary.scenario);
    println!("policy          {}", summary.policy);
    println!("seed            {} (replication {})", summary.seed, summary.replication);
    println!("total cost      {:.2}", m.total_cost);
    println!("  holding       {:.2}", m.holding_total);
    println!("  stockout      {:.2}", m.stockout_total);
    println!("  ordering      {:.2}", m.ordering_total);
    println!("service level   {:.2}% of periods", 100.0 * m.period_service_level);
    println!("fill rate       {:.2}% of units", 100.0 * m.fill_rate);
    println!("avg inventory   {:.2}", m.avg_inventory);
    println!("stockouts       {}", m.stockout_events);
    println!("final (s, S)    {}", summary.final_params);
    if let Some(p) = summary.final_posterior {
        println!("final estimates lambda {:.3}, alpha {:.4}", p.demand_mean(), p.disruption_mean());
    }
    println!("wrote {} and {}", trace_path.display(), summary_path.display());
    Ok(())
}

fn parse_list(raw: &str, what: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                Error::Configuration(format!("{what} list has an unparseable entry `{s}`"))
            })
        })
        .collect()
}

fn cmd_compare(a: CompareArgs) -> std::result::Result<(), Failure> {
    let (cfg, out) = resolve(&a.common).map_err(config_err)?;
    let n_reps = a.reps.unwrap_or(cfg.n_reps);
    if n_reps < 2 {
        return Err(config_err(Error::Configuration("--reps must be at least 2".into())));
    }
    let names = a
        .scenario
        .clone()
        .unwrap_or_else(|| "stationary,demand-shock,supply-disruption".into());
    let scenarios = names
        .split(',')
        .map(|n| scenario_named(&cfg, n))
        .collect::<Result<Vec<_>>>()
        .map_err(config_err)?;
    for s in &scenarios {
        s.validate(cfg.experiment.horizon).map_err(config_err)?;
    }
    let magnitudes = a
        .robustness
        .as_deref()
        .map(|r| parse_list(r, "--robustness"))
        .transpose()
        .map_err(config_err)?;
    if matches!(&magnitudes, Some(m) if m.is_empty() || m.iter().any(|x| *x <= 0.0)) {
        return Err(config_err(Error::Configuration(
            "--robustness needs positive shock rates".into(),
        )));
    }

    let seed = cfg.seed;
    let x = &cfg.experiment;
    let mut report = ComparisonReport {
        seed,
        n_reps,
        ..ComparisonReport::default()
    };
    let mut main = Vec::new();
    for s in &scenarios {
        eprintln!("running {} ({n_reps} replications)", s.name());
        main.push(run_experiment(s, n_reps, seed, x).map_err(runtime)?);
    }
    report.stationary_baseline_reference = Some(
        match main.iter().find(|r| r.scenario == ScenarioKind::Stationary.as_str()) {
            Some(r) => r.baseline,
            None => stationary_baseline_reference(n_reps, seed, x).map_err(runtime)?,
        },
    );
    for r in &main {
        report.push_main(r);
    }
    if let Some(m) = &magnitudes {
        eprintln!("running shock-magnitude sweep {m:?}");
        let robustness = robustness_sweep(m, n_reps, seed, x).map_err(runtime)?;
        report.push_robustness(&robustness);
    }
    if a.sensitivity {
        eprintln!("running sensitivity grid");
        let sens = sensitivity_sweep(x, &default_variations(), &scenarios, n_reps, seed)
            .map_err(runtime)?;
        report.push_sensitivity(&sens);
    }

    std::fs::create_dir_all(&out).map_err(|e| runtime(e.into()))?;
    let csv_path = out.join("comparison.csv");
    let json_path = out.join("comparison.json");
    (|| -> Result<()> {
        let mut w = create(&csv_path)?;
        report.write_csv(&mut w)?;
        w.flush()?;
        write_json(&json_path, &report)
    })()
    .map_err(runtime)?;

    print_table(&report);
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn print_table(report: &ComparisonReport) {
    println!(
        "{:<12} {:<24} {:<9} {:>11} {:>9} {:>9} {:>9} {:>9} {:>10}",
        "section", "label", "policy", "total cost", "service", "fill", "change", "t", "p"
    );
    for e in &report.entries {
        for (policy, m, last) in [("static", &e.baseline, false), ("adaptive", &e.adaptive, true)] {
            let (change, t, p) = if last {
                (
                    format!("{:+.1}%", e.percent_change),
                    format!("{:.2}", e.t_statistic),
                    format!("{:.2e}", e.p_value),
                )
            } else {
                Default::default()
            };
            println!(
                "{:<12} {:<24} {:<9} {:>11.2} {:>8.1}% {:>8.1}% {:>9} {:>9} {:>10}",
                e.section,
                e.label,
                policy,
                m.total_cost,
                100.0 * m.period_service_level,
                100.0 * m.fill_rate,
                change,
                t,
                p
            );
        }
    }
    if let Some(r) = &report.stationary_baseline_reference {
        println!(
            "reference: static policy, stationary scenario: total cost {:.2}, service {:.1}%",
            r.total_cost,
            100.0 * r.period_service_level
        );
    }
    println!("change = (static - adaptive) / static; positive favours adaptive");
}

fn cmd_plotdata(a: PlotArgs) -> std::result::Result<(), Failure> {
    let kind: PlotKind = a.kind.parse().map_err(config_err)?;
    let mut traces = Vec::new();
    for path in &a.traces {
        let file = File::open(path).map_err(|e| {
            config_err(Error::Configuration(format!("cannot read trace {}: {e}", path.display())))
        })?;
        let trace = read_trace_csv(BufReader::new(file)).map_err(Failure::Runtime)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        traces.push((name, trace));
    }
    let mut buf = Vec::new();
    write_plot_data(&mut buf, kind, &traces).map_err(Failure::Runtime)?;
    std::fs::create_dir_all(&a.out).map_err(|e| runtime(e.into()))?;
    let path = a.out.join(format!("{}.csv", kind.as_str()));
    std::fs::write(&path, buf).map_err(|e| runtime(e.into()))?;
    println!("wrote {} ({} series)", path.display(), traces.len());
    Ok(())
}

/// `λ ~ Gamma(10⁶, 10⁵)`, `α ~ Beta(2·10³, 98·10³)`: means 10 and 0.02 with
/// negligible spread.
pub fn concentrated_stationary_posterior() -> PosteriorState {
    PosteriorState::new(1e6, 1e5, 2e3, 98e3).expect("valid concentrated posterior")
}

#[derive(Serialize)]
struct BaselineReport {
    seed: u64,
    num_samples: u32,
    planning_horizon: u32,
    mode: &'static str,
    best: PolicyParams,
    best_cost: f64,
    ranking: Vec<PolicyEvaluation>,
}

fn cmd_optimize_baseline(a: OptimizeArgs) -> std::result::Result<(), Failure> {
    let (mut cfg, out) = resolve(&a.common).map_err(config_err)?;
    let opt = &mut cfg.experiment.adaptive.optimizer;
    if let Some(m) = a.samples {
        if m == 0 {
            return Err(config_err(Error::Configuration("--samples must be at least 1".into())));
        }
        opt.num_samples = m;
    }
    opt.lead_time = cfg.experiment.lead_time;
    let opt = opt.clone();
    let mut rng = RngStream::new(cfg.seed, StreamId::Optimizer, 0);
    let (_, mut evals) = optimize(
        &concentrated_stationary_posterior(),
        &opt,
        &cfg.experiment.costs,
        &cfg.experiment.initial_state(),
        &mut rng,
    )
    .map_err(runtime)?;
    let best = *select_best(&evals).expect("non-empty grid");
    evals.sort_by(|x, y| {
        x.estimated_cost
            .total_cmp(&y.estimated_cost)
            .then(x.params.order_up_to.cmp(&y.params.order_up_to))
            .then(x.params.reorder_point.cmp(&y.params.reorder_point))
    });
    let report = BaselineReport {
        seed: cfg.seed,
        num_samples: opt.num_samples,
        planning_horizon: opt.planning_horizon,
        mode: opt.mode.as_str(),
        best: best.params,
        best_cost: best.estimated_cost,
        ranking: evals.iter().take(10).cloned().collect(),
    };
    std::fs::create_dir_all(&out).map_err(|e| runtime(e.into()))?;
    let path = out.join("optimize_baseline.json");
    write_json(&path, &report).map_err(runtime)?;

    println!(
        "optimal (s, S) = {}  estimated cost over {} periods: {:.2} (M = {})",
        best.params, opt.planning_horizon, best.estimated_cost, opt.num_samples
    );
    println!("{:>10} {:>12} {:>10}", "(s, S)", "cost", "std err");
    for e in &report.ranking {
        println!("{:>10} {:>12.2} {:>10.2}", e.params.to_string(), e.estimated_cost, e.cost_std_error);
    }
    println!("wrote {}", path.display());
    Ok(())
}
