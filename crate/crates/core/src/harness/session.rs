use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::io::{read_json, sha256_hex, with_hash_header, write_atomic, write_json};
use crate::env::SliceEnv;
use crate::error::{Error, Result};
use crate::incremental::{incremental_options, incremental_train, Transition};
use crate::maddpg::{init_agents, tail_mean_reward, train, write_trace_csv, Agent, TraceRow, TrainSchedule};
use crate::nn::{AdamConfig, MlpCheckpoint};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const AGENT_FORMAT: &str = "edgeslice.agent";
pub const MANIFEST_FORMAT: &str = "edgeslice.session";
const VERSION: u32 = 1;
/// Share of the trace averaged for the reported tail reward.
pub const TAIL_FRACTION: f64 = 0.1;

/// The four networks of one agent. Optimizer moments are not persisted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub format: String,
    pub version: u32,
    pub slice_id: usize,
    pub actor: MlpCheckpoint,
    pub critic: MlpCheckpoint,
    pub target_actor: MlpCheckpoint,
    pub target_critic: MlpCheckpoint,
}

impl From<&Agent> for AgentCheckpoint {
    fn from(agent: &Agent) -> Self {
        AgentCheckpoint {
            format: AGENT_FORMAT.into(),
            version: VERSION,
            slice_id: agent.slice_id,
            actor: (&agent.actor).into(),
            critic: (&agent.critic).into(),
            target_actor: (&agent.target_actor).into(),
            target_critic: (&agent.target_critic).into(),
        }
    }
}

impl AgentCheckpoint {
    pub fn to_agent(&self, optimizer: AdamConfig) -> Result<Agent> {
        if self.format != AGENT_FORMAT || self.version != VERSION {
            return Err(Error::CheckpointMismatch(format!(
                "expected {AGENT_FORMAT} v{VERSION}, found {} v{}",
                self.format, self.version
            )));
        }
        let mut agent = Agent::from_networks(self.slice_id, self.actor.to_mlp()?, self.critic.to_mlp()?, optimizer);
        agent.target_actor = self.target_actor.to_mlp()?;
        agent.target_critic = self.target_critic.to_mlp()?;
        if !agent.target_actor.same_shape(&agent.actor) || !agent.target_critic.same_shape(&agent.critic) {
            return Err(Error::CheckpointMismatch(format!(
                "agent {} target networks differ in shape from their mains",
                self.slice_id
            )));
        }
        Ok(agent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionKind {
    Train,
    Increment,
    Decrement,
}

/// Link from a fine-tuning session back to the session it started from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParentLink {
    pub manifest: String,
    /// SHA-256 of the parent manifest's bytes.
    pub manifest_sha256: String,
    pub config_hash: String,
    pub from: usize,
    pub to: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub format: String,
    pub version: u32,
    pub kind: SessionKind,
    pub seed: u64,
    pub config_hash: String,
    pub scenario_hash: String,
    pub num_slices: usize,
    pub max_slices: usize,
    pub global_dim: usize,
    pub schedule: TrainSchedule,
    pub trace_steps: usize,
    /// Mean shared reward over the last tenth of the trace.
    pub tail_reward: f64,
    pub agents: Vec<String>,
    pub trace: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<ParentLink>,
}

/// A session on disk together with its loaded or freshly trained contents.
#[derive(Clone, Debug)]
pub struct Session {
    pub dir: PathBuf,
    pub manifest: SessionManifest,
    pub agents: Vec<Agent>,
    /// Present only for sessions produced in this process.
    pub trace: Vec<TraceRow>,
}

impl Session {
    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join(MANIFEST_FILE)
    }
}

pub fn agent_file(index: usize) -> String {
    format!("agent_{index}.json")
}

pub fn seed_dir(root: &Path, seed: u64) -> PathBuf {
    root.join(format!("seed_{seed}"))
}

/// Trace CSV bytes, hash line first.
pub fn trace_bytes(config_hash: &str, trace: &[TraceRow], num_agents: usize) -> Result<Vec<u8>> {
    let mut body = Vec::new();
    write_trace_csv(&mut body, trace, num_agents)?;
    Ok(with_hash_header(config_hash, &body))
}

fn write_session(dir: &Path, manifest: &SessionManifest, agents: &[Agent], trace: &[TraceRow]) -> Result<()> {
    for (name, agent) in manifest.agents.iter().zip(agents) {
        write_json(&dir.join(name), &AgentCheckpoint::from(agent))?;
    }
    write_atomic(
        &dir.join(&manifest.trace),
        &trace_bytes(&manifest.config_hash, trace, agents.len())?,
    )?;
    // Manifest last, so its presence marks a complete session.
    write_json(&dir.join(MANIFEST_FILE), manifest)
}

fn manifest_for(
    config: &ExperimentConfig,
    kind: SessionKind,
    seed: u64,
    num_slices: usize,
    schedule: TrainSchedule,
    trace: &[TraceRow],
    parent: Option<ParentLink>,
) -> Result<SessionManifest> {
    let scenario = ExperimentConfig {
        num_slices,
        ..config.clone()
    };
    Ok(SessionManifest {
        format: MANIFEST_FORMAT.into(),
        version: VERSION,
        kind,
        seed,
        config_hash: config.config_hash()?,
        scenario_hash: scenario.scenario_hash()?,
        num_slices,
        max_slices: config.env.max_slices,
        global_dim: config.env.global_obs_dim(),
        schedule,
        trace_steps: trace.len(),
        tail_reward: tail_mean_reward(trace, TAIL_FRACTION),
        agents: (0..num_slices).map(agent_file).collect(),
        trace: TRACE_FILE.into(),
        parent,
    })
}

/// Trains one agent set from scratch for `seed` without touching the disk.
pub fn train_cell(config: &ExperimentConfig, seed: u64) -> Result<(Vec<Agent>, Vec<TraceRow>)> {
    let mut env = SliceEnv::new(config.env.clone(), config.num_slices, seed)?;
    let mut agents = init_agents(&env, &config.agent, seed)?;
    let trace = train(&mut env, &mut agents, &config.training, seed)?;
    Ok((agents, trace))
}

/// Trains every seed of `config` and writes `out/seed_<s>/` with a manifest,
/// one checkpoint per agent and the trace CSV.
pub fn run_train(config: &ExperimentConfig, out: &Path) -> Result<Vec<Session>> {
    config.validate()?;
    let mut sessions = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let (agents, trace) = train_cell(config, seed)?;
        let manifest = manifest_for(
            config,
            SessionKind::Train,
            seed,
            config.num_slices,
            config.training.schedule,
            &trace,
            None,
        )?;
        let dir = seed_dir(out, seed);
        write_session(&dir, &manifest, &agents, &trace)?;
        sessions.push(Session {
            dir,
            manifest,
            agents,
            trace,
        });
    }
    Ok(sessions)
}

pub fn load_manifest(dir: &Path) -> Result<SessionManifest> {
    let manifest: SessionManifest = read_json(&dir.join(MANIFEST_FILE))?;
    if manifest.format != MANIFEST_FORMAT || manifest.version != VERSION {
        return Err(Error::CheckpointMismatch(format!(
            "{}: expected {MANIFEST_FORMAT} v{VERSION}, found {} v{}",
            dir.display(),
            manifest.format,
            manifest.version
        )));
    }
    Ok(manifest)
}

/// Loads a session directory; optimizer moments start fresh.
pub fn load_session(dir: &Path, optimizer: AdamConfig) -> Result<Session> {
    let manifest = load_manifest(dir)?;
    let agents = manifest
        .agents
        .iter()
        .map(|name| read_json::<AgentCheckpoint>(&dir.join(name))?.to_agent(optimizer))
        .collect::<Result<Vec<_>>>()?;
    if agents.len() != manifest.num_slices {
        return Err(Error::CheckpointMismatch(format!(
            "{}: manifest lists {} agents for {} slices",
            dir.display(),
            agents.len(),
            manifest.num_slices
        )));
    }
    Ok(Session {
        dir: dir.to_path_buf(),
        manifest,
        agents,
        trace: Vec::new(),
    })
}

/// Session directories under `path`: `path` itself when it holds a manifest,
/// otherwise `path/seed_<s>` for each requested seed.
pub fn resolve_sessions(path: &Path, seeds: &[u64]) -> Result<Vec<PathBuf>> {
    if path.join(MANIFEST_FILE).is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    seeds
        .iter()
        .map(|&s| {
            let dir = seed_dir(path, s);
            if dir.join(MANIFEST_FILE).is_file() {
                Ok(dir)
            } else {
                Err(Error::Io(io::Error::new(
                    io::ErrorKind::NotFound,
                    format!("no session manifest at {} or {}", path.display(), dir.display()),
                )))
            }
        })
        .collect()
}

/// Fails with CHECKPOINT_MISMATCH unless the session fits `config`'s
/// environment and, when given, the expected agent count.
pub fn check_compatible(session: &Session, config: &ExperimentConfig, num_slices: Option<usize>) -> Result<()> {
    let m = &session.manifest;
    let dim = config.env.global_obs_dim();
    let mismatch = |msg: String| Err(Error::CheckpointMismatch(format!("{}: {msg}", session.dir.display())));
    if m.max_slices != config.env.max_slices {
        return mismatch(format!(
            "max_slices {} but config has {}",
            m.max_slices, config.env.max_slices
        ));
    }
    if let Some(n) = num_slices.filter(|&n| n != session.agents.len()) {
        return mismatch(format!("{} agents but config has {n} slices", session.agents.len()));
    }
    for agent in &session.agents {
        if agent.global_dim() != dim {
            return mismatch(format!(
                "agent {} critic expects global state {} but config gives {dim}",
                agent.slice_id,
                agent.global_dim()
            ));
        }
        if agent.actor.sizes() != expected_actor_sizes(config).as_slice() {
            return mismatch(format!(
                "agent {} actor layers {:?} differ from config",
                agent.slice_id,
                agent.actor.sizes()
            ));
        }
    }
    Ok(())
}

fn expected_actor_sizes(config: &ExperimentConfig) -> Vec<usize> {
    let mut sizes = vec![crate::env::LOCAL_OBS_DIM];
    sizes.extend(&config.agent.actor_hidden);
    sizes.push(crate::env::ACTION_DIM);
    sizes
}

/// Transitions visiting `targets` in order starting from `from` agents.
pub fn plan_transitions(from: usize, targets: &[usize]) -> Vec<Transition> {
    let mut cur = from;
    targets
        .iter()
        .map(|&t| {
            let step = if t > cur {
                Transition::Grow(t)
            } else {
                Transition::Shrink(t)
            };
            cur = t;
            step
        })
        .collect()
}

fn check_plan(from: usize, plan: &[Transition], max_slices: usize) -> Result<()> {
    if plan.is_empty() {
        return Err(Error::Count("no transition target given".into()));
    }
    let mut cur = from;
    for step in plan {
        match *step {
            Transition::Grow(n) if n <= cur || n > max_slices => {
                return Err(Error::Count(format!(
                    "cannot grow {cur} agents to {n} (max {max_slices})"
                )));
            }
            Transition::Shrink(n) if n >= cur || n == 0 => {
                return Err(Error::Count(format!("cannot shrink {cur} agents to {n}")));
            }
            _ => cur = step.target(),
        }
    }
    Ok(())
}

fn step_dir_name(kind: SessionKind, from: usize, to: usize) -> String {
    let kind = match kind {
        SessionKind::Increment => "increment",
        SessionKind::Decrement => "decrement",
        SessionKind::Train => "train",
    };
    format!("{kind}_{from}_to_{to}")
}

/// Applies each transition in `plan` to the session at `base`, fine-tunes
/// with `config.incremental` and writes one session per step under `out`.
/// Each step's manifest links to its parent's. The base session's own seed
/// is used unless `seed` is given.
pub fn run_incremental(
    config: &ExperimentConfig,
    base: &Path,
    plan: &[Transition],
    out: &Path,
    seed: Option<u64>,
) -> Result<Vec<Session>> {
    config.validate()?;
    let dirs = resolve_sessions(base, &[seed.unwrap_or(config.seeds[0])])?;
    let mut parent = load_session(&dirs[0], config.agent.optimizer)?;
    check_compatible(&parent, config, None)?;
    check_plan(parent.agents.len(), plan, config.env.max_slices)?;
    let inc = &config.incremental;
    let schedule = incremental_options(&config.training, inc.fraction, inc.batch_size)?.schedule;
    schedule.validate()?;
    let seed = seed.unwrap_or(parent.manifest.seed);

    let mut sessions = Vec::with_capacity(plan.len());
    for &step in plan {
        let from = parent.agents.len();
        let to = step.target();
        let parent_path = parent.manifest_path();
        let parent_bytes = std::fs::read(&parent_path)?;
        let (mut agents, _) = step.apply(parent.agents.clone(), config.env.max_slices, config.agent.optimizer)?;
        let mut env = SliceEnv::new(config.env.clone(), to, seed)?;
        let trace = incremental_train(
            &mut env,
            &mut agents,
            &config.training,
            inc.fraction,
            inc.batch_size,
            seed,
        )?;
        let kind = match step {
            Transition::Grow(_) => SessionKind::Increment,
            Transition::Shrink(_) => SessionKind::Decrement,
        };
        let link = ParentLink {
            manifest: parent_path.to_string_lossy().into_owned(),
            manifest_sha256: sha256_hex(&parent_bytes),
            config_hash: parent.manifest.config_hash.clone(),
            from,
            to,
            fraction: inc.fraction,
        };
        let manifest = manifest_for(config, kind, seed, to, schedule, &trace, Some(link))?;
        let dir = out.join(step_dir_name(kind, from, to));
        write_session(&dir, &manifest, &agents, &trace)?;
        let session = Session {
            dir,
            manifest,
            agents,
            trace,
        };
        sessions.push(session.clone());
        parent = session;
    }
    Ok(sessions)
}
