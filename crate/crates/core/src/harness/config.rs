use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::io::sha256_hex;
use crate::baselines::BaselineKind;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::incremental::{DEFAULT_FRACTION, DEFAULT_INCREMENTAL_BATCH};
use crate::maddpg::{AgentConfig, TrainOptions};

/// Slots per evaluation in the short (default) mode.
pub const DEFAULT_EVAL_HORIZON: usize = 30;
/// Slots per evaluation in the long mode used for stable statistics.
pub const LONG_EVAL_HORIZON: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Maddpg,
    Random,
    Over,
    Static,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Random,
        PolicyKind::Over,
        PolicyKind::Maddpg,
        PolicyKind::Static,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Maddpg => "maddpg",
            PolicyKind::Random => "random",
            PolicyKind::Over => "over",
            PolicyKind::Static => "static",
        }
    }

    /// Column heading used in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Maddpg => "MADDPG",
            PolicyKind::Random => "Random",
            PolicyKind::Over => "Over allocation",
            PolicyKind::Static => "Static slicing",
        }
    }

    /// Position in comparison tables.
    pub fn table_rank(self) -> usize {
        Self::ALL.iter().position(|&p| p == self).expect("listed")
    }

    pub fn baseline(self) -> Option<BaselineKind> {
        match self {
            PolicyKind::Maddpg => None,
            PolicyKind::Random => Some(BaselineKind::Random),
            PolicyKind::Over => Some(BaselineKind::OverAllocation),
            PolicyKind::Static => Some(BaselineKind::StaticSlicing),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maddpg" => Ok(PolicyKind::Maddpg),
            "random" => Ok(PolicyKind::Random),
            "over" => Ok(PolicyKind::Over),
            "static" => Ok(PolicyKind::Static),
            other => Err(Error::Config(format!(
                "unknown policy {other:?}; expected maddpg, random, over or static"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncrementalConfig {
    /// Share of the base schedule spent fine-tuning after a transition.
    pub fraction: f64,
    pub batch_size: usize,
    /// Agent counts visited in order after the base run.
    pub targets: Vec<usize>,
}

impl Default for IncrementalConfig {
    fn default() -> Self {
        IncrementalConfig {
            fraction: DEFAULT_FRACTION,
            batch_size: DEFAULT_INCREMENTAL_BATCH,
            targets: Vec::new(),
        }
    }
}

fn default_num_slices() -> usize {
    4
}
fn default_seeds() -> Vec<u64> {
    vec![1]
}
fn default_eval_horizon() -> usize {
    DEFAULT_EVAL_HORIZON
}
fn default_policy() -> PolicyKind {
    PolicyKind::Maddpg
}

/// Everything needed to reproduce one experiment, loaded from JSON.
/// Omitted fields take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default = "default_num_slices")]
    pub num_slices: usize,
    #[serde(default)]
    pub training: TrainOptions,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default = "default_policy")]
    pub policy: PolicyKind,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_eval_horizon")]
    pub eval_horizon: usize,
    #[serde(default)]
    pub incremental: IncrementalConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: EnvConfig::default(),
            num_slices: default_num_slices(),
            training: TrainOptions::default(),
            agent: AgentConfig::default(),
            policy: default_policy(),
            seeds: default_seeds(),
            eval_horizon: default_eval_horizon(),
            incremental: IncrementalConfig::default(),
            output_dir: None,
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

impl ExperimentConfig {
    /// Parses JSON; syntax and schema problems are reported as CONFIG.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        let max = self.env.max_slices;
        check(self.num_slices >= 1 && self.num_slices <= max, || {
            format!("num_slices {} outside 1..={max}", self.num_slices)
        })?;
        self.training.schedule.validate()?;
        let ou = &self.training.ou;
        check(ou.scale.is_finite() && ou.scale >= 0.0, || {
            format!("OU scale {} must be >= 0", ou.scale)
        })?;
        check(ou.mu.is_finite(), || "OU mean must be finite".into())?;
        check(ou.sigma.is_finite() && ou.sigma >= 0.0, || {
            format!("OU sigma {} must be >= 0", ou.sigma)
        })?;
        check((0.0..=1.0).contains(&ou.beta), || {
            format!("OU beta {} outside [0, 1]", ou.beta)
        })?;
        check(self.training.replay_capacity >= 1, || {
            "replay capacity must be positive".into()
        })?;
        if let Some(scale) = self.training.reward_scale {
            check(scale.is_finite() && scale > 0.0, || {
                format!("reward scale {scale} must be > 0")
            })?;
        }
        let opt = &self.agent.optimizer;
        check(opt.learning_rate.is_finite() && opt.learning_rate > 0.0, || {
            format!("learning rate {} must be > 0", opt.learning_rate)
        })?;
        check(
            (0.0..1.0).contains(&opt.beta1) && (0.0..1.0).contains(&opt.beta2),
            || "Adam betas must lie in [0, 1)".into(),
        )?;
        check(opt.epsilon > 0.0, || "Adam epsilon must be > 0".into())?;
        check(
            self.agent
                .actor_hidden
                .iter()
                .chain(&self.agent.critic_hidden)
                .all(|&w| w > 0),
            || "hidden layer widths must be positive".into(),
        )?;
        check(!self.seeds.is_empty(), || "seed list is empty".into())?;
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        check(seeds.len() == self.seeds.len(), || "seed list has duplicates".into())?;
        check(self.eval_horizon >= 1, || {
            "eval horizon must be at least one slot".into()
        })?;
        let inc = &self.incremental;
        check(inc.fraction > 0.0 && inc.fraction <= 1.0, || {
            format!("incremental fraction {} outside (0, 1]", inc.fraction)
        })?;
        check(inc.batch_size >= 1, || "incremental batch size must be positive".into())?;
        let mut prev = self.num_slices;
        for &t in &inc.targets {
            check(t >= 1 && t <= max, || {
                format!("incremental target {t} outside 1..={max}")
            })?;
            check(t != prev, || {
                format!("incremental target {t} repeats the current count")
            })?;
            prev = t;
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of every setting that shapes outputs,
    /// excluding seeds (recorded per file), the policy selector and paths.
    pub fn config_hash(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if let Value::Object(map) = &mut value {
            map.remove("seeds");
            map.remove("policy");
            map.remove("output_dir");
        }
        Ok(sha256_hex(serde_json::to_string(&value)?.as_bytes()))
    }

    /// Hash of what makes evaluations comparable: environment, slice count
    /// and horizon.
    pub fn scenario_hash(&self) -> Result<String> {
        let value = serde_json::json!({
            "env": self.env,
            "num_slices": self.num_slices,
            "eval_horizon": self.eval_horizon,
        });
        Ok(sha256_hex(serde_json::to_string(&value)?.as_bytes()))
    }

    /// Copy with a single seed, as used for one campaign cell.
    pub fn with_seed(&self, seed: u64) -> Self {
        ExperimentConfig {
            seeds: vec![seed],
            ..self.clone()
        }
    }
}
