//! The fixed beta sweep: every scenario, every beta, baseline included.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::maddpg::{TrainConfig, Variant};
use crate::particle_envs::{Role, Scenario};
use crate::Result;

use super::aggregate::{
    aggregate_series, load_column, variance_report, Column, DEFAULT_CONFIDENCE, DEFAULT_WINDOW,
};
use super::config::{ExperimentConfig, DEFAULT_SEEDS};
use super::experiment::{run_experiment, ExperimentRecord, SeedFailure};
use super::plot::{
    commit_hash, emit_plot_data, final_ordering, CurveSource, LabelledCurve, Manifest, PlotFormat,
};

pub const SWEEP_BETAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// One configuration of the sweep for a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Matchup {
    /// Directory name, e.g. `cl_1e-3` or `adversary_cl_1e-3`.
    pub name: String,
    pub label: String,
    pub variants: BTreeMap<Role, Variant>,
}

fn all_roles(scenario: Scenario, variant: Variant) -> BTreeMap<Role, Variant> {
    scenario.roles().iter().map(|&r| (r, variant)).collect()
}

/// Cooperative scenarios put all agents on the same variant. Competitive
/// ones pit a capacity-limited side against a baseline side in both
/// directions, plus baseline against baseline.
pub fn sweep_plan(scenario: Scenario, betas: &[f64]) -> Vec<Matchup> {
    let cl = |beta| Variant::CapacityLimited { beta };
    if scenario.is_cooperative() {
        std::iter::once(Matchup {
            name: "baseline".into(),
            label: Variant::Baseline.label(),
            variants: all_roles(scenario, Variant::Baseline),
        })
        .chain(betas.iter().map(|&b| Matchup {
            name: format!("cl_{b:e}"),
            label: cl(b).label(),
            variants: all_roles(scenario, cl(b)),
        }))
        .collect()
    } else {
        let vs = |good: Variant, adversary: Variant| {
            let variants: BTreeMap<Role, Variant> = scenario
                .roles()
                .iter()
                .map(|&r| {
                    (
                        r,
                        if r == Role::Adversary {
                            adversary
                        } else {
                            good
                        },
                    )
                })
                .collect();
            (
                format!("good {} vs adversary {}", good.label(), adversary.label()),
                variants,
            )
        };
        let (label, variants) = vs(Variant::Baseline, Variant::Baseline);
        let mut plan = vec![Matchup {
            name: "baseline".into(),
            label,
            variants,
        }];
        for &b in betas {
            let (label, variants) = vs(cl(b), Variant::Baseline);
            plan.push(Matchup {
                name: format!("good_cl_{b:e}"),
                label,
                variants,
            });
            let (label, variants) = vs(Variant::Baseline, cl(b));
            plan.push(Matchup {
                name: format!("adversary_cl_{b:e}"),
                label,
                variants,
            });
        }
        plan
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub scenarios: Vec<Scenario>,
    pub betas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
    pub out_dir: PathBuf,
    pub window: usize,
    pub confidence: f64,
    pub format: PlotFormat,
}

impl SweepConfig {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            scenarios: Scenario::ALL.to_vec(),
            betas: SWEEP_BETAS.to_vec(),
            seeds: DEFAULT_SEEDS.to_vec(),
            train: TrainConfig::default(),
            out_dir: out_dir.into(),
            window: DEFAULT_WINDOW,
            confidence: DEFAULT_CONFIDENCE,
            format: PlotFormat::Csv,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioSweep {
    pub scenario: Scenario,
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub failures: Vec<(String, SeedFailure)>,
}

fn scenario_dir(root: &Path, scenario: Scenario) -> PathBuf {
    root.join(scenario.name())
}

/// Trains every matchup of every scenario, then writes one curve table and
/// manifest per scenario. Curves follow agent 0's reward.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ScenarioSweep>> {
    let mut results = Vec::with_capacity(cfg.scenarios.len());
    for &scenario in &cfg.scenarios {
        let dir = scenario_dir(&cfg.out_dir, scenario);
        let mut curves = Vec::new();
        let mut sources = Vec::new();
        let mut variance = Vec::new();
        let mut failures = Vec::new();
        for matchup in sweep_plan(scenario, &cfg.betas) {
            let exp = ExperimentConfig {
                scenario,
                variants: matchup.variants.clone(),
                seeds: cfg.seeds.clone(),
                train: cfg.train.clone(),
                out_dir: dir.join(&matchup.name),
            };
            let report = run_experiment(&exp)?;
            failures.extend(
                report
                    .failures
                    .into_iter()
                    .map(|f| (matchup.name.clone(), f)),
            );
            if report.csvs.len() < 2 {
                continue;
            }
            let (episodes, series) = load_column(&report.csvs, Column::Reward(0))?;
            let first = episodes.first().copied().unwrap_or(1);
            curves.push(LabelledCurve {
                label: matchup.label.clone(),
                curve: aggregate_series(&series, first, cfg.window, cfg.confidence)?,
            });
            variance.push(variance_report(&matchup.label, &series)?);
            sources.push(CurveSource {
                label: matchup.label,
                agent: 0,
                agents: ExperimentRecord::from_config(&exp).agents,
            });
        }
        let manifest = Manifest {
            scenario: scenario.to_string(),
            curves: sources,
            betas: cfg.betas.clone(),
            seeds: cfg.seeds.clone(),
            window: cfg.window,
            confidence: cfg.confidence,
            commit: commit_hash().to_string(),
            ordering: final_ordering(&curves),
            variance,
        };
        emit_plot_data(&dir, &curves, &manifest, cfg.format)?;
        results.push(ScenarioSweep {
            scenario,
            dir,
            manifest,
            failures,
        });
    }
    Ok(results)
}
