use std::io::Write;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::agent::{Agent, AgentBatch, SharedBatch};
use super::noise::{OuNoise, OuParams};
use super::replay::{ReplayBuffer, Transition, DEFAULT_REPLAY_CAPACITY};
use crate::env::{Action, SliceEnv, ACTION_DIM, LOCAL_OBS_DIM};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Step budget of the three training stages plus the update hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSchedule {
    /// Random actions only, filling the buffer.
    pub observe_steps: usize,
    /// Noisy policy with linearly decaying noise, updating every step.
    pub explore_steps: usize,
    /// Noise-free policy, updating every step.
    pub train_steps: usize,
    pub batch_size: usize,
    pub gamma: f64,
    pub tau: f64,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule {
            observe_steps: 300,
            explore_steps: 2000,
            train_steps: 2000,
            batch_size: 300,
            gamma: 0.99,
            tau: 0.1,
        }
    }
}

impl TrainSchedule {
    pub fn total_steps(&self) -> usize {
        self.observe_steps + self.explore_steps + self.train_steps
    }

    /// Every stage length multiplied by `fraction` and rounded.
    pub fn scaled(&self, fraction: f64, batch_size: usize) -> Self {
        let scale = |k: usize| (k as f64 * fraction).round() as usize;
        TrainSchedule {
            observe_steps: scale(self.observe_steps),
            explore_steps: scale(self.explore_steps),
            train_steps: scale(self.train_steps),
            batch_size,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Config(format!("tau {} outside (0, 1]", self.tau)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if self.explore_steps + self.train_steps > 0 && self.total_steps() < self.batch_size {
            return Err(Error::Config(format!(
                "batch size {} exceeds the {} transitions the schedule ever stores",
                self.batch_size,
                self.total_steps()
            )));
        }
        Ok(())
    }

    /// Noise scale used at 0-based step `f` of the exploration stage:
    /// `(k2 - f) / k2` times the initial scale.
    pub fn exploration_scale(&self, f: usize, initial: f64) -> f64 {
        if self.explore_steps == 0 {
            return 0.0;
        }
        initial * (self.explore_steps.saturating_sub(f)) as f64 / self.explore_steps as f64
    }

    pub fn stage_at(&self, step: usize) -> Stage {
        if step < self.observe_steps {
            Stage::Observe
        } else if step < self.observe_steps + self.explore_steps {
            Stage::Explore
        } else {
            Stage::Train
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Observe,
    Explore,
    Train,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Observe => "observe",
            Stage::Explore => "explore",
            Stage::Train => "train",
        }
    }
}

/// Which reward each agent's critic learns from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardMode {
    /// Every agent learns from the sum of all agents' rewards.
    #[default]
    Shared,
    /// Each agent learns from its own reward.
    Individual,
}

fn default_replay_capacity() -> usize {
    DEFAULT_REPLAY_CAPACITY
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    #[serde(default)]
    pub schedule: TrainSchedule,
    #[serde(default)]
    pub ou: OuParams,
    #[serde(default)]
    pub reward_mode: RewardMode,
    #[serde(default = "default_replay_capacity")]
    pub replay_capacity: usize,
    /// Multiplier on rewards before they enter the TD target. `None` uses
    /// `1 - gamma`, which keeps discounted returns inside the critic's tanh range.
    #[serde(default)]
    pub reward_scale: Option<f64>,
}

impl TrainOptions {
    pub fn effective_reward_scale(&self) -> f64 {
        self.reward_scale.unwrap_or(1.0 - self.schedule.gamma)
    }
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            schedule: TrainSchedule::default(),
            ou: OuParams::default(),
            reward_mode: RewardMode::default(),
            replay_capacity: DEFAULT_REPLAY_CAPACITY,
            reward_scale: None,
        }
    }
}

/// One training step's record.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub stage: Stage,
    pub epsilon: f64,
    pub shared_reward: f64,
    pub rewards: Vec<f64>,
    /// Executed (clipped, noisy) actions.
    pub actions: Vec<Action>,
    /// Pre-update critic loss per agent; `None` when no update ran.
    pub losses: Vec<Option<f64>>,
    /// Pre-update batch-mean Q per agent.
    pub mean_q: Vec<Option<f64>>,
}

/// Runs the observe / explore / train schedule on `env` with one agent per
/// active slice. The replay buffer is created empty for every call.
pub fn train(env: &mut SliceEnv, agents: &mut [Agent], options: &TrainOptions, seed: u64) -> Result<Vec<TraceRow>> {
    let schedule = options.schedule;
    schedule.validate()?;
    let reward_scale = options.effective_reward_scale();
    if !(reward_scale.is_finite() && reward_scale > 0.0) {
        return Err(Error::Config(format!("reward scale {reward_scale} must be positive")));
    }
    if agents.len() != env.num_slices() {
        return Err(Error::Count(format!(
            "{} agents for {} active slices",
            agents.len(),
            env.num_slices()
        )));
    }
    let global_dim = env.config().global_obs_dim();
    if let Some(a) = agents.iter().find(|a| a.global_dim() != global_dim) {
        return Err(Error::ShapeMismatch(format!(
            "agent {} expects a {}-wide global state, environment provides {}",
            a.slice_id,
            a.global_dim(),
            global_dim
        )));
    }

    let mut noise_rng = stream_rng(seed, Stream::Noise);
    let mut replay_rng = stream_rng(seed, Stream::Replay);
    let mut noises: Vec<OuNoise> = agents.iter().map(|_| OuNoise::new(options.ou)).collect();
    let mut buffer = ReplayBuffer::new(options.replay_capacity);
    let mut trace = Vec::with_capacity(schedule.total_steps());

    let mut state = env.observe_global();
    let mut locals = env.observe_all_local();
    for step in 0..schedule.total_steps() {
        let stage = schedule.stage_at(step);
        let epsilon = match stage {
            Stage::Observe => options.ou.scale,
            Stage::Explore => schedule.exploration_scale(step - schedule.observe_steps, options.ou.scale),
            Stage::Train => 0.0,
        };
        let actions: Vec<Action> = match stage {
            Stage::Observe => agents
                .iter()
                .map(|_| std::array::from_fn(|_| noise_rng.random::<f64>()))
                .collect(),
            _ => agents
                .iter()
                .zip(&locals)
                .zip(&mut noises)
                .map(|((agent, local), noise)| agent.act(local, epsilon, noise, &mut noise_rng))
                .collect(),
        };
        let outcome = env.step(&actions)?;
        let next_state = env.observe_global();
        let next_locals = env.observe_all_local();
        buffer.push(Transition {
            state: std::mem::replace(&mut state, next_state.clone()),
            locals: std::mem::replace(&mut locals, next_locals.clone()),
            actions: actions.clone(),
            rewards: outcome.rewards.clone(),
            shared_reward: outcome.shared_reward,
            next_state,
            next_locals,
        });

        let mut losses = vec![None; agents.len()];
        let mut mean_q = vec![None; agents.len()];
        if stage != Stage::Observe {
            if let Some(indices) = buffer.sample_indices(schedule.batch_size, &mut replay_rng) {
                let shared = shared_batch(&buffer, &indices);
                for (i, agent) in agents.iter_mut().enumerate() {
                    let batch = agent_batch(&buffer, &indices, i, options.reward_mode, reward_scale);
                    losses[i] = Some(agent.update_critic(&shared, &batch, schedule.gamma)?);
                    mean_q[i] = Some(agent.update_actor(&shared, &batch)?);
                    agent.soft_update_targets(schedule.tau)?;
                }
            }
        }
        trace.push(TraceRow {
            step,
            stage,
            epsilon,
            shared_reward: outcome.shared_reward,
            rewards: outcome.rewards,
            actions,
            losses,
            mean_q,
        });
    }
    Ok(trace)
}

fn shared_batch(buffer: &ReplayBuffer, indices: &[usize]) -> SharedBatch {
    let dim = buffer.get(indices[0]).expect("sampled index").state.len();
    let gather = |pick: fn(&Transition) -> &[f64]| {
        let mut m = Array2::zeros((indices.len(), dim));
        for (row, &i) in m.rows_mut().into_iter().zip(indices) {
            let t = buffer.get(i).expect("sampled index");
            row.into_slice().expect("contiguous row").copy_from_slice(pick(t));
        }
        m
    };
    SharedBatch {
        state: gather(|t| &t.state),
        next_state: gather(|t| &t.next_state),
    }
}

fn agent_batch(buffer: &ReplayBuffer, indices: &[usize], agent: usize, mode: RewardMode, scale: f64) -> AgentBatch {
    let n = indices.len();
    let mut local = Array2::zeros((n, LOCAL_OBS_DIM));
    let mut next_local = Array2::zeros((n, LOCAL_OBS_DIM));
    let mut action = Array2::zeros((n, ACTION_DIM));
    let mut reward = Array1::zeros(n);
    for (row, &i) in indices.iter().enumerate() {
        let t = buffer.get(i).expect("sampled index");
        for k in 0..LOCAL_OBS_DIM {
            local[[row, k]] = t.locals[agent][k];
            next_local[[row, k]] = t.next_locals[agent][k];
        }
        for k in 0..ACTION_DIM {
            action[[row, k]] = t.actions[agent][k];
        }
        let r = match mode {
            RewardMode::Shared => t.shared_reward,
            RewardMode::Individual => t.rewards[agent],
        };
        reward[row] = scale * r;
    }
    AgentBatch {
        local,
        action,
        reward,
        next_local,
    }
}

fn opt_field(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV columns: `step,stage,epsilon,shared_reward,reward_i..,loss_i..,mean_q_i..`.
pub fn write_trace_csv<W: Write>(sink: W, trace: &[TraceRow], num_agents: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<String> = ["step", "stage", "epsilon", "shared_reward"].map(String::from).to_vec();
    for prefix in ["reward", "loss", "mean_q"] {
        header.extend((0..num_agents).map(|i| format!("{prefix}_{i}")));
    }
    w.write_record(&header)?;
    for row in trace {
        let mut rec = vec![
            row.step.to_string(),
            row.stage.as_str().to_string(),
            row.epsilon.to_string(),
            row.shared_reward.to_string(),
        ];
        rec.extend(row.rewards.iter().map(f64::to_string));
        rec.extend(row.losses.iter().copied().map(opt_field));
        rec.extend(row.mean_q.iter().copied().map(opt_field));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean shared reward over the last `fraction` of a trace.
pub fn tail_mean_reward(trace: &[TraceRow], fraction: f64) -> f64 {
    let n = ((trace.len() as f64 * fraction).ceil() as usize).clamp(1, trace.len().max(1));
    let tail = &trace[trace.len().saturating_sub(n)..];
    tail.iter().map(|r| r.shared_reward).sum::<f64>() / tail.len().max(1) as f64
}

/// A fresh agent per active slice, initialized from the `Init` stream of `seed`.
pub fn init_agents(env: &SliceEnv, config: &super::AgentConfig, seed: u64) -> Result<Vec<Agent>> {
    let mut rng: ChaCha8Rng = stream_rng(seed, Stream::Init);
    let dim = env.config().global_obs_dim();
    (0..env.num_slices())
        .map(|i| Agent::new(i, dim, config, &mut rng))
        .collect()
}
