//! Experiment configuration.
//!
//! The on-disk format is line-oriented `section.key = value` text: easy to
//! diff, zero parsing dependencies. Unknown keys are rejected, every field
//! has a default, and `to_text` -> `parse` round-trips losslessly. Any key
//! can also be overridden through the environment as `ARQ_<KEY>` with dots
//! replaced by underscores (e.g. `ARQ_QUERY_N_K=5`).

use std::collections::BTreeMap;

use crate::envs::MazeObservation;
use crate::error::{Error, Result};
use crate::numerics::HiddenActivation;
use crate::query::StrategyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Maze,
    LiftedNav,
}

/// Whether the safety gate runs: per-strategy default or forced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateMode {
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    // env.*
    pub env_kind: EnvKind,
    pub maze_layout_seed: u64,
    pub maze_wall_fraction: f64,
    pub maze_observation: MazeObservation,
    pub max_episode_len: usize,
    pub lifted_obs_dim: usize,

    // model.*
    pub latent_dim: usize,
    pub hidden: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub kernel: String, // "rbf" | "rq"
    pub rbf_bandwidth: Option<f64>, // None = median heuristic
    pub prior_weight: f64,   // beta_1
    pub alpha1: f64,
    pub alpha2: f64,
    pub contrast_weight: f64, // beta
    pub entropy_weight: f64,  // lambda

    // train.*
    pub batch_size: usize,
    pub gamma: f64,
    pub sr_gamma: f64,
    pub sr_sync_period: u64,
    pub lr_adversary: f64,
    pub lr_policy: f64,
    pub lr_sr: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_steps: u64,
    pub adversary_every: u64,
    pub policy_every: u64,
    pub sr_every: u64,

    // query.*
    pub strategy: StrategyKind,
    pub alpha: f64,
    pub n_k: usize,
    pub t_off: u64,
    pub window: usize,
    pub budget: u64,
    pub onpolicy_min_gap: u64,
    pub gate: GateMode,
    pub coreset_sample: usize,
    pub ensemble_heads: usize,
    pub store_onpolicy_in_expert: bool,
    pub demo_episodes: usize,

    // buffer.*
    pub buffer_capacity: usize,

    // run.*
    pub total_steps: u64,
    pub seeds: Vec<u64>,
    pub metrics_period: u64,
    pub stop_on_budget_exhausted: bool,
    pub workers: usize,
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env_kind: EnvKind::Maze,
            maze_layout_seed: 9,
            maze_wall_fraction: 0.14,
            maze_observation: MazeObservation::OneHot,
            max_episode_len: 200,
            lifted_obs_dim: 32,

            latent_dim: 8,
            hidden: vec![64, 64],
            hidden_activation: HiddenActivation::Tanh,
            kernel: "rbf".into(),
            rbf_bandwidth: None,
            prior_weight: 1.0,
            alpha1: 1.0,
            alpha2: 1.0,
            contrast_weight: 1.0,
            entropy_weight: 0.0,

            batch_size: 64,
            gamma: 0.95,
            sr_gamma: 0.95,
            sr_sync_period: 500,
            lr_adversary: 1e-3,
            lr_policy: 1e-3,
            lr_sr: 1e-3,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_steps: 10_000,
            adversary_every: 1,
            policy_every: 1,
            sr_every: 1,

            strategy: StrategyKind::CoresetSr,
            alpha: 0.05,
            n_k: 10,
            t_off: 2000,
            window: 1000,
            budget: 300,
            onpolicy_min_gap: 10,
            gate: GateMode::Auto,
            coreset_sample: 2000,
            ensemble_heads: 10,
            store_onpolicy_in_expert: true,
            demo_episodes: 1,

            buffer_capacity: 50_000,

            total_steps: 25_000,
            seeds: vec![0],
            metrics_period: 1000,
            stop_on_budget_exhausted: false,
            workers: 0,
            out_dir: "runs".into(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for {key}: {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Parse(format!("bad bool for {key}: {other:?}"))),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<u64>> {
    let v = value.trim();
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|part| parse_num(key, part))
        .collect::<Result<Vec<u64>>>()
}

impl ExperimentConfig {
    /// Apply one `section.key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "env.kind" => {
                self.env_kind = match value.trim() {
                    "maze" => EnvKind::Maze,
                    "lifted_nav" => EnvKind::LiftedNav,
                    other => return Err(Error::Parse(format!("unknown env.kind {other:?}"))),
                }
            }
            "env.maze_layout_seed" => self.maze_layout_seed = parse_num(key, value)?,
            "env.maze_wall_fraction" => self.maze_wall_fraction = parse_num(key, value)?,
            "env.maze_observation" => {
                self.maze_observation = match value.trim() {
                    "one_hot" => MazeObservation::OneHot,
                    "coords" => MazeObservation::Coords,
                    other => {
                        return Err(Error::Parse(format!("unknown env.maze_observation {other:?}")))
                    }
                }
            }
            "env.max_episode_len" => self.max_episode_len = parse_num(key, value)?,
            "env.lifted_obs_dim" => self.lifted_obs_dim = parse_num(key, value)?,

            "model.latent_dim" => self.latent_dim = parse_num(key, value)?,
            "model.hidden" => {
                self.hidden = parse_list(key, value)?.into_iter().map(|v| v as usize).collect()
            }
            "model.hidden_activation" => {
                self.hidden_activation = match value.trim() {
                    "tanh" => HiddenActivation::Tanh,
                    "relu" => HiddenActivation::Relu,
                    other => {
                        return Err(Error::Parse(format!(
                            "unknown model.hidden_activation {other:?}"
                        )))
                    }
                }
            }
            "model.kernel" => {
                let v = value.trim();
                if v != "rbf" && v != "rq" {
                    return Err(Error::Parse(format!("unknown model.kernel {v:?}")));
                }
                self.kernel = v.into();
            }
            "model.rbf_bandwidth" => {
                self.rbf_bandwidth = match value.trim() {
                    "median" => None,
                    other => Some(parse_num(key, other)?),
                }
            }
            "model.prior_weight" => self.prior_weight = parse_num(key, value)?,
            "model.alpha1" => self.alpha1 = parse_num(key, value)?,
            "model.alpha2" => self.alpha2 = parse_num(key, value)?,
            "model.contrast_weight" => self.contrast_weight = parse_num(key, value)?,
            "model.entropy_weight" => self.entropy_weight = parse_num(key, value)?,

            "train.batch_size" => self.batch_size = parse_num(key, value)?,
            "train.gamma" => self.gamma = parse_num(key, value)?,
            "train.sr_gamma" => self.sr_gamma = parse_num(key, value)?,
            "train.sr_sync_period" => self.sr_sync_period = parse_num(key, value)?,
            "train.lr_adversary" => self.lr_adversary = parse_num(key, value)?,
            "train.lr_policy" => self.lr_policy = parse_num(key, value)?,
            "train.lr_sr" => self.lr_sr = parse_num(key, value)?,
            "train.eps_start" => self.eps_start = parse_num(key, value)?,
            "train.eps_end" => self.eps_end = parse_num(key, value)?,
            "train.eps_decay_steps" => self.eps_decay_steps = parse_num(key, value)?,
            "train.adversary_every" => self.adversary_every = parse_num(key, value)?,
            "train.policy_every" => self.policy_every = parse_num(key, value)?,
            "train.sr_every" => self.sr_every = parse_num(key, value)?,

            "query.strategy" => {
                self.strategy = match value.trim() {
                    "coreset_sr" => StrategyKind::CoresetSr,
                    "random" => StrategyKind::Random,
                    "uncertainty" => StrategyKind::Uncertainty,
                    other => return Err(Error::Parse(format!("unknown query.strategy {other:?}"))),
                }
            }
            "query.alpha" => self.alpha = parse_num(key, value)?,
            "query.n_k" => self.n_k = parse_num(key, value)?,
            "query.t_off" => self.t_off = parse_num(key, value)?,
            "query.window" => self.window = parse_num(key, value)?,
            "query.budget" => self.budget = parse_num(key, value)?,
            "query.onpolicy_min_gap" => self.onpolicy_min_gap = parse_num(key, value)?,
            "query.gate" => {
                self.gate = match value.trim() {
                    "auto" => GateMode::Auto,
                    "on" => GateMode::On,
                    "off" => GateMode::Off,
                    other => return Err(Error::Parse(format!("unknown query.gate {other:?}"))),
                }
            }
            "query.coreset_sample" => self.coreset_sample = parse_num(key, value)?,
            "query.ensemble_heads" => self.ensemble_heads = parse_num(key, value)?,
            "query.store_onpolicy_in_expert" => {
                self.store_onpolicy_in_expert = parse_bool(key, value)?
            }
            "query.demo_episodes" => self.demo_episodes = parse_num(key, value)?,

            "buffer.capacity" => self.buffer_capacity = parse_num(key, value)?,

            "run.total_steps" => self.total_steps = parse_num(key, value)?,
            "run.seeds" => self.seeds = parse_list(key, value)?,
            "run.metrics_period" => self.metrics_period = parse_num(key, value)?,
            "run.stop_on_budget_exhausted" => {
                self.stop_on_budget_exhausted = parse_bool(key, value)?
            }
            "run.workers" => self.workers = parse_num(key, value)?,
            "run.out_dir" => self.out_dir = value.trim().into(),

            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parse config text. Later assignments win; unknown keys error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut bad_keys = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse(format!(
                    "line {}: expected `key = value`, got {raw:?}",
                    lineno + 1
                )));
            };
            if let Err(e) = cfg.set(key.trim(), value) {
                bad_keys.push(format!("line {}: {e}", lineno + 1));
            }
        }
        if !bad_keys.is_empty() {
            return Err(Error::Parse(bad_keys.join("; ")));
        }
        Ok(cfg)
    }

    /// Canonical serialization; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut pairs: BTreeMap<&'static str, String> = BTreeMap::new();
        pairs.insert(
            "env.kind",
            match self.env_kind {
                EnvKind::Maze => "maze".into(),
                EnvKind::LiftedNav => "lifted_nav".into(),
            },
        );
        pairs.insert("env.maze_layout_seed", self.maze_layout_seed.to_string());
        pairs.insert("env.maze_wall_fraction", self.maze_wall_fraction.to_string());
        pairs.insert(
            "env.maze_observation",
            match self.maze_observation {
                MazeObservation::OneHot => "one_hot".into(),
                MazeObservation::Coords => "coords".into(),
            },
        );
        pairs.insert("env.max_episode_len", self.max_episode_len.to_string());
        pairs.insert("env.lifted_obs_dim", self.lifted_obs_dim.to_string());

        pairs.insert("model.latent_dim", self.latent_dim.to_string());
        pairs.insert(
            "model.hidden",
            self.hidden
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        pairs.insert(
            "model.hidden_activation",
            match self.hidden_activation {
                HiddenActivation::Tanh => "tanh".into(),
                HiddenActivation::Relu => "relu".into(),
            },
        );
        pairs.insert("model.kernel", self.kernel.clone());
        pairs.insert(
            "model.rbf_bandwidth",
            self.rbf_bandwidth
                .map_or_else(|| "median".into(), |v| v.to_string()),
        );
        pairs.insert("model.prior_weight", self.prior_weight.to_string());
        pairs.insert("model.alpha1", self.alpha1.to_string());
        pairs.insert("model.alpha2", self.alpha2.to_string());
        pairs.insert("model.contrast_weight", self.contrast_weight.to_string());
        pairs.insert("model.entropy_weight", self.entropy_weight.to_string());

        pairs.insert("train.batch_size", self.batch_size.to_string());
        pairs.insert("train.gamma", self.gamma.to_string());
        pairs.insert("train.sr_gamma", self.sr_gamma.to_string());
        pairs.insert("train.sr_sync_period", self.sr_sync_period.to_string());
        pairs.insert("train.lr_adversary", self.lr_adversary.to_string());
        pairs.insert("train.lr_policy", self.lr_policy.to_string());
        pairs.insert("train.lr_sr", self.lr_sr.to_string());
        pairs.insert("train.eps_start", self.eps_start.to_string());
        pairs.insert("train.eps_end", self.eps_end.to_string());
        pairs.insert("train.eps_decay_steps", self.eps_decay_steps.to_string());
        pairs.insert("train.adversary_every", self.adversary_every.to_string());
        pairs.insert("train.policy_every", self.policy_every.to_string());
        pairs.insert("train.sr_every", self.sr_every.to_string());

        pairs.insert("query.strategy", self.strategy.name().into());
        pairs.insert("query.alpha", self.alpha.to_string());
        pairs.insert("query.n_k", self.n_k.to_string());
        pairs.insert("query.t_off", self.t_off.to_string());
        pairs.insert("query.window", self.window.to_string());
        pairs.insert("query.budget", self.budget.to_string());
        pairs.insert("query.onpolicy_min_gap", self.onpolicy_min_gap.to_string());
        pairs.insert(
            "query.gate",
            match self.gate {
                GateMode::Auto => "auto".into(),
                GateMode::On => "on".into(),
                GateMode::Off => "off".into(),
            },
        );
        pairs.insert("query.coreset_sample", self.coreset_sample.to_string());
        pairs.insert("query.ensemble_heads", self.ensemble_heads.to_string());
        pairs.insert(
            "query.store_onpolicy_in_expert",
            self.store_onpolicy_in_expert.to_string(),
        );
        pairs.insert("query.demo_episodes", self.demo_episodes.to_string());

        pairs.insert("buffer.capacity", self.buffer_capacity.to_string());

        pairs.insert("run.total_steps", self.total_steps.to_string());
        pairs.insert(
            "run.seeds",
            self.seeds
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        pairs.insert("run.metrics_period", self.metrics_period.to_string());
        pairs.insert(
            "run.stop_on_budget_exhausted",
            self.stop_on_budget_exhausted.to_string(),
        );
        pairs.insert("run.workers", self.workers.to_string());
        pairs.insert("run.out_dir", self.out_dir.clone());

        let mut out = String::new();
        for (k, v) in pairs {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Apply `ARQ_*` environment overrides to every known key.
    pub fn apply_env_overrides(&mut self) -> Result<()> {
        let text = self.to_text();
        for line in text.lines() {
            let key = line.split(" = ").next().unwrap();
            let var = format!("ARQ_{}", key.replace('.', "_").to_uppercase());
            if let Ok(value) = std::env::var(&var) {
                self.set(key, &value)?;
            }
        }
        Ok(())
    }

    /// Check field ranges; collects every offending key into one error.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.latent_dim == 0 {
            bad.push("model.latent_dim must be >= 1");
        }
        if self.batch_size < 2 {
            bad.push("train.batch_size must be >= 2");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            bad.push("train.gamma must be in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.sr_gamma) {
            bad.push("train.sr_gamma must be in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.alpha) || self.alpha == 0.0 {
            bad.push("query.alpha must be in (0, 1)");
        }
        if self.n_k == 0 {
            bad.push("query.n_k must be >= 1");
        }
        if self.t_off == 0 {
            bad.push("query.t_off must be >= 1");
        }
        if self.window == 0 {
            bad.push("query.window must be >= 1");
        }
        if self.ensemble_heads < 2 {
            bad.push("query.ensemble_heads must be >= 2");
        }
        if self.buffer_capacity < self.batch_size {
            bad.push("buffer.capacity must be >= train.batch_size");
        }
        if self.total_steps == 0 {
            bad.push("run.total_steps must be >= 1");
        }
        if self.seeds.is_empty() {
            bad.push("run.seeds must not be empty");
        }
        if self.metrics_period == 0 {
            bad.push("run.metrics_period must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.eps_start) || !(0.0..=1.0).contains(&self.eps_end) {
            bad.push("train.eps_start / train.eps_end must be in [0, 1]");
        }
        if self.maze_wall_fraction < 0.0 || self.maze_wall_fraction > 0.5 {
            bad.push("env.maze_wall_fraction must be in [0, 0.5]");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    /// Whether the safety gate runs under this config.
    pub fn gate_enabled(&self) -> bool {
        match self.gate {
            GateMode::On => true,
            GateMode::Off => false,
            GateMode::Auto => self.strategy == StrategyKind::CoresetSr,
        }
    }
}
