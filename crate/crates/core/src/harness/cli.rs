use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::particle_envs::Scenario;
use crate::{Error, Result};

use super::aggregate::{
    aggregate_series, load_column, variance_report, Column, DEFAULT_CONFIDENCE, DEFAULT_WINDOW,
};
use super::config::Settings;
use super::experiment::{run_experiment, ExperimentRecord};
use super::plot::{
    commit_hash, emit_plot_data, final_ordering, CurveSource, LabelledCurve, Manifest, PlotFormat,
};
use super::selftest::run_selftest;
use super::sweep::{run_sweep, SweepConfig, SWEEP_BETAS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "clmaddpg",
    version,
    about = "Multi-agent DDPG with capacity-limited critics on particle worlds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one configuration under every seed and write one CSV per seed.
    Run(RunArgs),
    /// Combine per-seed CSVs into a rolling-mean curve with t-intervals.
    Aggregate(AggregateArgs),
    /// Train and aggregate the fixed beta grid against the baseline.
    Sweep(SweepArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Seed CSV files, or directories holding `seed_*.csv`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    pub confidence: f64,
    /// Agent whose column is aggregated.
    #[arg(long, default_value_t = 0)]
    pub agent: usize,
    /// Aggregate the MI column instead of the reward.
    #[arg(long)]
    pub mi: bool,
    /// Curve label (defaults to the agent's variant label).
    #[arg(long)]
    pub label: Option<String>,
    /// Output directory (defaults to the first input's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Scenario defaults to all four; seeds and training overrides apply to every run.
    #[command(flatten)]
    pub settings: Settings,
}

fn merged(config: Option<&Path>, flags: &Settings) -> Result<Settings> {
    let base = match config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    Ok(base.overlay(flags.clone()))
}

fn run(args: &RunArgs) -> Result<i32> {
    let settings = merged(args.config.as_deref(), &args.settings)?;
    let scenario = settings.scenario()?.map(Scenario::name).unwrap_or("run");
    let cfg = settings.experiment(&Path::new("results").join(scenario))?;
    let report = run_experiment(&cfg)?;
    for path in &report.csvs {
        println!("{}", path.display());
    }
    for f in &report.failures {
        eprintln!("seed {} failed: {}", f.seed, f.message);
    }
    Ok(if report.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_RUNTIME
    })
}

fn seed_number(path: &Path) -> Option<u64> {
    path.file_stem()?
        .to_str()?
        .strip_prefix("seed_")?
        .parse()
        .ok()
}

/// Expands directories into their `seed_*.csv` files, ordered by seed.
fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<(u64, PathBuf)> = std::fs::read_dir(input)
                .map_err(|e| Error::io(input, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .filter_map(|p| seed_number(&p).map(|s| (s, p)))
                .collect();
            found.sort();
            files.extend(found.into_iter().map(|(_, p)| p));
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn aggregate_cmd(args: &AggregateArgs) -> Result<i32> {
    let format: PlotFormat = args.format.parse()?;
    let files = collect_inputs(&args.inputs)?;
    if files.len() < 2 {
        return Err(Error::Usage(format!(
            "aggregation needs at least 2 seed files, found {}",
            files.len()
        )));
    }
    let column = if args.mi {
        Column::Mi(args.agent)
    } else {
        Column::Reward(args.agent)
    };
    let (episodes, series) = load_column(&files, column)?;
    let first = episodes.first().copied().unwrap_or(1);
    let curve = aggregate_series(&series, first, args.window, args.confidence)?;

    let home = files[0].parent().map(Path::to_path_buf).unwrap_or_default();
    let record = ExperimentRecord::read(&home)?;
    let agents = record
        .as_ref()
        .map(|r| r.agents.clone())
        .unwrap_or_default();
    let label = args.label.clone().unwrap_or_else(|| {
        agents
            .get(args.agent)
            .map(|a| a.label.clone())
            .unwrap_or_else(|| format!("agent {}", args.agent))
    });
    let curves = [LabelledCurve {
        label: label.clone(),
        curve,
    }];
    let mut betas: Vec<f64> = agents.iter().map(|a| a.beta).collect();
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    let manifest = Manifest {
        scenario: record
            .as_ref()
            .map_or_else(|| "unknown".into(), |r| r.scenario.clone()),
        curves: vec![CurveSource {
            label: label.clone(),
            agent: args.agent,
            agents,
        }],
        betas,
        seeds: files.iter().filter_map(|p| seed_number(p)).collect(),
        window: args.window,
        confidence: args.confidence,
        commit: commit_hash().to_string(),
        ordering: final_ordering(&curves),
        variance: vec![variance_report(&label, &series)?],
    };
    let out = args.out.clone().unwrap_or(home);
    for path in emit_plot_data(&out, &curves, &manifest, format)? {
        println!("{}", path.display());
    }
    Ok(EXIT_OK)
}

fn sweep_cmd(args: &SweepArgs) -> Result<i32> {
    let settings = merged(args.config.as_deref(), &args.settings)?;
    if settings.beta.is_some() || settings.variant.is_some() {
        return Err(Error::Usage(format!(
            "sweep always covers beta in {SWEEP_BETAS:?} and the baseline"
        )));
    }
    let mut cfg = SweepConfig::new(
        settings
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("results/sweep")),
    );
    if let Some(scenario) = settings.scenario()? {
        cfg.scenarios = vec![scenario];
    }
    if let Some(seeds) = &settings.seeds {
        cfg.seeds = seeds.clone();
    }
    cfg.train = settings.train_config();
    cfg.format = args.format.parse()?;
    let mut failed = false;
    for result in run_sweep(&cfg)? {
        println!("{}", result.dir.display());
        for (matchup, f) in &result.failures {
            failed = true;
            eprintln!(
                "{} {matchup} seed {} failed: {}",
                result.scenario, f.seed, f.message
            );
        }
    }
    Ok(if failed { EXIT_RUNTIME } else { EXIT_OK })
}

fn selftest_cmd() -> i32 {
    let mut failed = 0;
    for outcome in run_selftest() {
        match &outcome.result {
            Ok(()) => println!("ok    {}", outcome.name),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {}: {msg}", outcome.name);
            }
        }
    }
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_RUNTIME
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
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Aggregate(args) => aggregate_cmd(args),
        Command::Sweep(args) => sweep_cmd(args),
        Command::Selftest => Ok(selftest_cmd()),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}
