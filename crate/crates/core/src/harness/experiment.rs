//! Multi-seed training runs and the per-seed CSV format.

use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::maddpg::{run_training, EpisodeLog};
use crate::{Error, Result};

use super::config::ExperimentConfig;

pub const FAILURES_FILE: &str = "failures.txt";
pub const EXPERIMENT_FILE: &str = "experiment.json";

pub fn seed_csv_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed_{seed}.csv"))
}

pub fn episode_csv_header(num_agents: usize) -> Vec<String> {
    let rewards = (0..num_agents).map(|i| format!("agent_{i}_reward"));
    let mi = (0..num_agents).map(|i| format!("agent_{i}_mi"));
    std::iter::once("episode".to_string())
        .chain(rewards)
        .chain(mi)
        .collect()
}

/// Writes one row per episode. Reals use the shortest representation that
/// parses back to the same `f64`; wall-clock time is not written.
pub fn write_episode_csv(out: impl Write, num_agents: usize, logs: &[EpisodeLog]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(episode_csv_header(num_agents))?;
    for log in logs {
        let row = std::iter::once(log.episode.to_string())
            .chain(log.rewards.iter().map(f64::to_string))
            .chain(log.mean_mi.iter().map(f64::to_string));
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

/// Parses a per-seed CSV back into episode logs (`wall_ms` is 0).
pub fn read_episode_csv(input: impl Read) -> Result<Vec<EpisodeLog>> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let n = header.len().saturating_sub(1) / 2;
    if header.len() != 2 * n + 1 || header != episode_csv_header(n) {
        return Err(Error::Usage(format!(
            "unexpected episode CSV header {header:?}"
        )));
    }
    let parse = |field: &str| -> Result<f64> {
        field
            .parse()
            .map_err(|_| Error::Usage(format!("'{field}' is not a number")))
    };
    let mut logs = Vec::new();
    for record in r.records() {
        let record = record?;
        let episode = record[0]
            .parse()
            .map_err(|_| Error::Usage(format!("bad episode index '{}'", &record[0])))?;
        let values = record
            .iter()
            .skip(1)
            .map(parse)
            .collect::<Result<Vec<_>>>()?;
        logs.push(EpisodeLog {
            episode,
            rewards: values[..n].to_vec(),
            mean_mi: values[n..].to_vec(),
            wall_ms: 0.0,
        });
    }
    Ok(logs)
}

pub fn read_episode_csv_file(path: &Path) -> Result<Vec<EpisodeLog>> {
    read_episode_csv(File::open(path).map_err(|e| Error::io(path, e))?)
}

/// Description of a run written next to its CSVs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub scenario: String,
    /// `role -> variant` per agent, in agent order.
    pub agents: Vec<AgentRecord>,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    pub max_episode_length: usize,
    pub batch_size: usize,
    pub update_every: usize,
    pub ensemble_k: usize,
    pub hidden: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub role: String,
    pub variant: String,
    pub label: String,
    pub beta: f64,
}

impl ExperimentRecord {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        let t = &cfg.train;
        Self {
            scenario: cfg.scenario.to_string(),
            agents: cfg
                .scenario
                .roles()
                .iter()
                .map(|&role| {
                    let v = cfg.variant_for(role);
                    AgentRecord {
                        role: role.to_string(),
                        variant: v.to_string(),
                        label: v.label(),
                        beta: v.beta(),
                    }
                })
                .collect(),
            seeds: cfg.seeds.clone(),
            episodes: t.episodes,
            max_episode_length: t.max_episode_length,
            batch_size: t.batch_size,
            update_every: t.update_every,
            ensemble_k: t.ensemble_k,
            hidden: t.hidden,
        }
    }

    pub fn read(dir: &Path) -> Result<Option<Self>> {
        let path = dir.join(EXPERIMENT_FILE);
        match fs::read(&path) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedFailure {
    pub seed: u64,
    pub message: String,
}

/// What a finished experiment left on disk.
#[derive(Clone, Debug, Default)]
pub struct ExperimentReport {
    /// Per-seed CSVs of the seeds that completed, in seed order.
    pub csvs: Vec<PathBuf>,
    pub failures: Vec<SeedFailure>,
}

fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write_probe");
    File::create(&probe)
        .and_then(|mut f| f.write_all(b"ok"))
        .and_then(|_| fs::remove_file(&probe))
        .map_err(|e| Error::io(dir, e))
}

/// Trains every seed (in parallel, sharing nothing) and writes one CSV per
/// seed. A seed that fails is listed in `failures.txt`; the others carry on.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let dir = &cfg.out_dir;
    ensure_writable(dir)?;
    let record = ExperimentRecord::from_config(cfg);
    let json = serde_json::to_vec_pretty(&record)?;
    fs::write(dir.join(EXPERIMENT_FILE), json)
        .map_err(|e| Error::io(dir.join(EXPERIMENT_FILE), e))?;

    let variants = cfg.agent_variants();
    let n = variants.len();
    let outcomes: Vec<(u64, Result<PathBuf>)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let result = run_training(cfg.train.clone(), cfg.scenario, &variants, seed, |_| {})
                .and_then(|logs| {
                    let path = seed_csv_path(dir, seed);
                    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
                    write_episode_csv(std::io::BufWriter::new(file), n, &logs)?;
                    Ok(path)
                });
            (seed, result)
        })
        .collect();

    let mut report = ExperimentReport::default();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(path) => report.csvs.push(path),
            Err(e) => {
                let stale = seed_csv_path(dir, seed);
                if stale.exists() {
                    fs::remove_file(&stale).map_err(|e| Error::io(&stale, e))?;
                }
                report.failures.push(SeedFailure {
                    seed,
                    message: e.to_string(),
                });
            }
        }
    }

    let failures_path = dir.join(FAILURES_FILE);
    if report.failures.is_empty() {
        if failures_path.exists() {
            fs::remove_file(&failures_path).map_err(|e| Error::io(&failures_path, e))?;
        }
    } else {
        let text: String = report
            .failures
            .iter()
            .map(|f| format!("seed {}: {}\n", f.seed, f.message))
            .collect();
        fs::write(&failures_path, text).map_err(|e| Error::io(&failures_path, e))?;
    }
    Ok(report)
}
