use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PolicyKind};
use super::io::{csv_reader, read_hash_header, read_json, with_hash_header, write_atomic, write_json};
use super::session::{check_compatible, load_session, resolve_sessions};
use crate::baselines::BaselinePolicy;
use crate::env::{eval_utility, Action, SliceEnv};
use crate::error::{Error, Result};
use crate::maddpg::Agent;
use crate::rng::{derive_seed, Stream};

pub const SUMMARY_FILE: &str = "summary.json";
pub const UTILITIES_FILE: &str = "utilities.csv";
pub const SUMMARY_FORMAT: &str = "edgeslice.summary";

/// Maximum, minimum, mean and population variance of per-slot utility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub max: f64,
    pub min: f64,
    pub average: f64,
    pub variance: f64,
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("statistics of an empty sample".into()));
        }
        let n = values.len() as f64;
        let average = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - average).powi(2)).sum::<f64>() / n;
        Ok(Stats {
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            average,
            variance,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub utilities: Vec<f64>,
    pub stats: Stats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub format: String,
    pub policy: PolicyKind,
    pub config_hash: String,
    pub scenario_hash: String,
    pub num_slices: usize,
    pub horizon: usize,
    /// Over every slot of every seed.
    pub stats: Stats,
    pub per_seed: Vec<SeedSummary>,
}

impl EvalSummary {
    pub fn from_seeds(config: &ExperimentConfig, policy: PolicyKind, per_seed: Vec<SeedSummary>) -> Result<Self> {
        let pooled: Vec<f64> = per_seed.iter().flat_map(|s| s.utilities.iter().copied()).collect();
        Ok(EvalSummary {
            format: SUMMARY_FORMAT.into(),
            policy,
            config_hash: config.config_hash()?,
            scenario_hash: config.scenario_hash()?,
            num_slices: config.num_slices,
            horizon: config.eval_horizon,
            stats: Stats::from_values(&pooled)?,
            per_seed,
        })
    }

    /// `seed,slot,utility` rows after the hash line.
    pub fn utilities_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["seed", "slot", "utility"])?;
        for s in &self.per_seed {
            for (slot, u) in s.utilities.iter().enumerate() {
                w.write_record([s.seed.to_string(), slot.to_string(), u.to_string()])?;
            }
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(with_hash_header(&self.config_hash, &body))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(UTILITIES_FILE), &self.utilities_csv()?)?;
        write_json(&dir.join(SUMMARY_FILE), self)
    }

    /// Reads `summary.json` from a directory or a direct file path.
    pub fn load(path: &Path) -> Result<Self> {
        let file = if path.is_dir() {
            path.join(SUMMARY_FILE)
        } else {
            path.to_path_buf()
        };
        let summary: EvalSummary = read_json(&file)?;
        if summary.format != SUMMARY_FORMAT {
            return Err(Error::MismatchedScenario(format!(
                "{}: not an evaluation summary (format {:?})",
                file.display(),
                summary.format
            )));
        }
        Ok(summary)
    }
}

/// Per-slot utilities read back from a utilities CSV, with its hash line.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityColumn {
    pub config_hash: Option<String>,
    pub rows: Vec<(u64, usize, f64)>,
}

pub fn read_utilities_csv(text: &str) -> Result<UtilityColumn> {
    let mut rows = Vec::new();
    for rec in csv_reader(text).deserialize() {
        rows.push(rec?);
    }
    Ok(UtilityColumn {
        config_hash: read_hash_header(text).map(String::from),
        rows,
    })
}

/// Rolls a fresh environment for `horizon` slots, asking `policy` for one
/// action per slice each slot, and returns the per-slot utilities.
pub fn rollout<F>(config: &ExperimentConfig, env_seed: u64, mut policy: F) -> Result<Vec<f64>>
where
    F: FnMut(&SliceEnv) -> Vec<Action>,
{
    let mut env = SliceEnv::new(config.env.clone(), config.num_slices, env_seed)?;
    (0..config.eval_horizon)
        .map(|_| {
            let actions = policy(&env);
            Ok(eval_utility(&env.step(&actions)?))
        })
        .collect()
}

/// Request stream used for evaluating `seed`, kept apart from training's.
pub fn eval_env_seed(seed: u64) -> u64 {
    derive_seed(seed, Stream::Eval, 0)
}

pub fn evaluate_agents(config: &ExperimentConfig, agents: &[Agent], seed: u64) -> Result<SeedSummary> {
    if agents.len() != config.num_slices {
        return Err(Error::CheckpointMismatch(format!(
            "{} agents for {} slices",
            agents.len(),
            config.num_slices
        )));
    }
    let utilities = rollout(config, eval_env_seed(seed), |env| {
        env.observe_all_local()
            .iter()
            .zip(agents)
            .map(|(obs, agent)| agent.policy(obs))
            .collect()
    })?;
    Ok(SeedSummary {
        seed,
        stats: Stats::from_values(&utilities)?,
        utilities,
    })
}

pub fn evaluate_baseline(config: &ExperimentConfig, policy: PolicyKind, seed: u64) -> Result<SeedSummary> {
    let kind = policy
        .baseline()
        .ok_or_else(|| Error::Config(format!("{policy} is not a baseline policy")))?;
    let mut baseline = BaselinePolicy::new(kind, config.num_slices, config.env.slice_cap_fraction, seed)?;
    let n = config.num_slices;
    let utilities = rollout(config, eval_env_seed(seed), |_| baseline.actions(n))?;
    Ok(SeedSummary {
        seed,
        stats: Stats::from_values(&utilities)?,
        utilities,
    })
}

/// Evaluates `config.policy` over every configured seed. MADDPG needs
/// `checkpoints`: a session directory or a training root holding `seed_<s>/`.
pub fn run_eval(config: &ExperimentConfig, checkpoints: Option<&Path>) -> Result<EvalSummary> {
    config.validate()?;
    let per_seed = match config.policy {
        PolicyKind::Maddpg => {
            let root = checkpoints.ok_or_else(|| Error::Config("maddpg evaluation needs checkpoints".into()))?;
            resolve_sessions(root, &config.seeds)?
                .iter()
                .map(|dir| {
                    let session = load_session(dir, config.agent.optimizer)?;
                    check_compatible(&session, config, Some(config.num_slices))?;
                    evaluate_agents(config, &session.agents, session.manifest.seed)
                })
                .collect::<Result<Vec<_>>>()?
        }
        baseline => config
            .seeds
            .iter()
            .map(|&seed| evaluate_baseline(config, baseline, seed))
            .collect::<Result<Vec<_>>>()?,
    };
    EvalSummary::from_seeds(config, config.policy, per_seed)
}
