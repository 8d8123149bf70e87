use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use crate::maddpg::{TrainConfig, Variant};
use crate::particle_envs::{Role, Scenario};
use crate::{Error, Result};

pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Everything needed to train one scenario under several seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Roles without an entry train as the baseline.
    pub variants: BTreeMap<Role, Variant>,
    pub seeds: Vec<u64>,
    /// Episode count lives in `train.episodes`.
    pub train: TrainConfig,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            scenario,
            variants: BTreeMap::new(),
            seeds: DEFAULT_SEEDS.to_vec(),
            train: TrainConfig::default(),
            out_dir: out_dir.into(),
        }
    }

    /// Puts every role of the scenario on `variant`.
    pub fn with_all(mut self, variant: Variant) -> Self {
        for &role in self.scenario.roles() {
            self.variants.insert(role, variant);
        }
        self
    }

    pub fn variant_for(&self, role: Role) -> Variant {
        self.variants
            .get(&role)
            .copied()
            .unwrap_or(Variant::Baseline)
    }

    /// One variant per agent, in agent order.
    pub fn agent_variants(&self) -> Vec<Variant> {
        self.scenario
            .roles()
            .iter()
            .map(|&r| self.variant_for(r))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let unique: BTreeSet<_> = self.seeds.iter().collect();
        if unique.len() != self.seeds.len() {
            return Err(Error::Config(format!(
                "seeds must be unique, got {:?}",
                self.seeds
            )));
        }
        for (role, variant) in &self.variants {
            if !self.scenario.roles().contains(role) {
                return Err(Error::Config(format!(
                    "{} has no {role} agent",
                    self.scenario
                )));
            }
            if !(variant.beta() >= 0.0 && variant.beta().is_finite()) {
                return Err(Error::Config(format!(
                    "beta must be finite and >= 0 for {role}"
                )));
            }
        }
        self.train.validate()
    }
}

/// Flat key-value settings shared by the command line and the config file.
/// Keys in the file use underscores (`max_episode_length`); flags use
/// dashes (`--max-episode-length`).
#[derive(Args, Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// coop_navigation, coop_communication, keep_away or physical_deception.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Put every agent on the capacity-limited variant with this beta.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Per-role variant, e.g. `adversary=cl:1e-3` or `good=baseline`. Repeatable.
    #[arg(long = "variant", value_name = "ROLE=VARIANT")]
    pub variant: Option<Vec<String>>,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub max_episode_length: Option<usize>,
    #[arg(long)]
    pub ensemble_k: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Environment steps between update rounds.
    #[arg(long)]
    pub update_every: Option<usize>,
    /// Transitions stored before the first update (default 4x batch size).
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub buffer_capacity: Option<usize>,
    #[arg(long)]
    pub noise_start: Option<f64>,
    #[arg(long)]
    pub noise_end: Option<f64>,
    /// Update rate of the running marginal action estimate.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of recent actions behind each marginal snapshot.
    #[arg(long)]
    pub mi_window: Option<usize>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        Settings { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Values set in `top` win over values in `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        overlay!(
            self,
            top,
            scenario,
            beta,
            variant,
            seeds,
            episodes,
            max_episode_length,
            ensemble_k,
            out,
            batch_size,
            update_every,
            warmup,
            hidden,
            gamma,
            tau,
            learning_rate,
            buffer_capacity,
            noise_start,
            noise_end,
            alpha,
            mi_window
        )
    }

    pub fn scenario(&self) -> Result<Option<Scenario>> {
        self.scenario.as_deref().map(str::parse).transpose()
    }

    /// Applies the training overrides on top of the defaults.
    pub fn train_config(&self) -> TrainConfig {
        let mut t = TrainConfig::default();
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),*) => {
                $(if let Some(v) = self.$src { t.$($dst).+ = v; })*
            };
        }
        set!(
            episodes => episodes, max_episode_length => max_episode_length, ensemble_k => ensemble_k,
            batch_size => batch_size, update_every => update_every, hidden => hidden, gamma => gamma,
            tau => tau, learning_rate => optimizer.learning_rate, buffer_capacity => buffer_capacity,
            noise_start => noise_start, noise_end => noise_end, alpha => alpha, mi_window => window
        );
        if self.warmup.is_some() {
            t.warmup = self.warmup;
        }
        t
    }

    /// `--beta` applies to every role; `--variant role=...` entries then
    /// override individual roles.
    pub fn variants(&self, scenario: Scenario) -> Result<BTreeMap<Role, Variant>> {
        let mut map = BTreeMap::new();
        if let Some(beta) = self.beta {
            let v = Variant::parse(&format!("cl:{beta}"))?;
            for &role in scenario.roles() {
                map.insert(role, v);
            }
        }
        for entry in self.variant.iter().flatten() {
            let (role, variant) = entry.split_once('=').ok_or_else(|| {
                Error::Config(format!("variant '{entry}' is not of the form role=variant"))
            })?;
            map.insert(role.trim().parse()?, Variant::parse(variant)?);
        }
        Ok(map)
    }

    /// Builds a validated experiment; `default_out` is used when no output
    /// directory is given.
    pub fn experiment(&self, default_out: &Path) -> Result<ExperimentConfig> {
        let scenario = self
            .scenario()?
            .ok_or_else(|| Error::Usage("--scenario is required".into()))?;
        let cfg = ExperimentConfig {
            scenario,
            variants: self.variants(scenario)?,
            seeds: self.seeds.clone().unwrap_or_else(|| DEFAULT_SEEDS.to_vec()),
            train: self.train_config(),
            out_dir: self
                .out
                .clone()
                .unwrap_or_else(|| default_out.to_path_buf()),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
