use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::noise::OuNoise;
use crate::env::{Action, LocalObs, ACTION_DIM, LOCAL_OBS_DIM};
use crate::error::{Error, Result};
use crate::nn::{Activation, Adam, AdamConfig, Direction, Mlp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub optimizer: AdamConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            actor_hidden: vec![32, 32],
            critic_hidden: vec![64, 64],
            optimizer: AdamConfig::default(),
        }
    }
}

impl AgentConfig {
    fn actor_shape(&self) -> (Vec<usize>, Vec<Activation>) {
        let mut sizes = vec![LOCAL_OBS_DIM];
        sizes.extend(&self.actor_hidden);
        sizes.push(ACTION_DIM);
        let mut acts = vec![Activation::Relu; self.actor_hidden.len()];
        acts.push(Activation::Sigmoid);
        (sizes, acts)
    }

    fn critic_shape(&self, global_dim: usize) -> (Vec<usize>, Vec<Activation>) {
        let mut sizes = vec![global_dim + ACTION_DIM];
        sizes.extend(&self.critic_hidden);
        sizes.push(1);
        let mut acts = vec![Activation::Relu; self.critic_hidden.len()];
        acts.push(Activation::Tanh);
        (sizes, acts)
    }
}

/// One slice's actor, critic, their targets and optimizer states.
#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub slice_id: usize,
    pub actor: Mlp,
    pub target_actor: Mlp,
    pub critic: Mlp,
    pub target_critic: Mlp,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
}

/// Batch rows shared by every agent: global states before and after the step.
pub struct SharedBatch {
    pub state: Array2<f64>,
    pub next_state: Array2<f64>,
}

/// One agent's slice of a sampled batch.
pub struct AgentBatch {
    pub local: Array2<f64>,
    pub action: Array2<f64>,
    pub reward: Array1<f64>,
    pub next_local: Array2<f64>,
}

/// `y = r + gamma * Q'`; the task is continuing, so nothing is masked.
pub fn td_target(reward: f64, next_q: f64, gamma: f64) -> f64 {
    reward + gamma * next_q
}

/// Critic input: the global state followed by the agent's own action.
pub fn critic_input(state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
    if action.len() != ACTION_DIM {
        return Err(Error::DimensionMismatch {
            context: "critic action",
            expected: ACTION_DIM,
            found: action.len(),
        });
    }
    let mut input = Vec::with_capacity(state.len() + ACTION_DIM);
    input.extend_from_slice(state);
    input.extend_from_slice(action);
    Ok(input)
}

fn critic_batch(state: ArrayView2<'_, f64>, action: ArrayView2<'_, f64>) -> Array2<f64> {
    concatenate(Axis(1), &[state, action]).expect("row counts match")
}

/// `target <- tau * main + (1 - tau) * target`, elementwise.
pub fn soft_update(main: &Mlp, target: &mut Mlp, tau: f64) -> Result<()> {
    if !main.same_shape(target) {
        return Err(Error::DimensionMismatch {
            context: "soft update",
            expected: main.num_params(),
            found: target.num_params(),
        });
    }
    for (t, &m) in target.params_mut().iter_mut().zip(main.params()) {
        *t = tau * m + (1.0 - tau) * *t;
    }
    Ok(())
}

fn clip_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

impl Agent {
    pub fn new<R: Rng + ?Sized>(slice_id: usize, global_dim: usize, config: &AgentConfig, rng: &mut R) -> Result<Self> {
        let (sizes, acts) = config.actor_shape();
        let actor = Mlp::init_uniform(&sizes, &acts, rng)?;
        let (sizes, acts) = config.critic_shape(global_dim);
        let critic = Mlp::init_uniform(&sizes, &acts, rng)?;
        Ok(Self::from_networks(slice_id, actor, critic, config.optimizer))
    }

    /// Targets start as copies of the mains; optimizer moments start at zero.
    pub fn from_networks(slice_id: usize, actor: Mlp, critic: Mlp, optimizer: AdamConfig) -> Self {
        Agent {
            slice_id,
            actor_opt: Adam::new(optimizer, actor.num_params()),
            critic_opt: Adam::new(optimizer, critic.num_params()),
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
        }
    }

    /// Width of the global state this agent's critic expects.
    pub fn global_dim(&self) -> usize {
        self.critic.input_dim() - ACTION_DIM
    }

    pub fn reset_optimizers(&mut self) {
        self.actor_opt.reset();
        self.critic_opt.reset();
    }

    /// Deterministic policy output.
    pub fn policy(&self, local: &LocalObs) -> Action {
        let out = self.actor.predict(local).expect("actor input width is fixed");
        std::array::from_fn(|k| out[k])
    }

    /// Policy output plus `noise_scale` times an OU sample, clipped to `[0, 1]`.
    pub fn act<R: Rng + ?Sized>(&self, local: &LocalObs, noise_scale: f64, noise: &mut OuNoise, rng: &mut R) -> Action {
        let mut action = self.policy(local);
        if noise_scale != 0.0 {
            let sample = noise.sample(rng);
            for (a, n) in action.iter_mut().zip(sample) {
                *a += noise_scale * n;
            }
        }
        action.map(clip_unit)
    }

    /// Critic estimate for one (state, action) pair.
    pub fn q_value(&self, state: &[f64], action: &Action) -> Result<f64> {
        Ok(self.critic.predict(&critic_input(state, action)?)?[0])
    }

    /// TD targets for a batch using the target actor and target critic.
    pub fn td_targets(&self, shared: &SharedBatch, batch: &AgentBatch, gamma: f64) -> Result<Array1<f64>> {
        let next_action = self.target_actor.predict_batch(batch.next_local.view())?;
        let next_q = self
            .target_critic
            .predict_batch(critic_batch(shared.next_state.view(), next_action.view()).view())?;
        Ok(Array1::from_iter(
            batch
                .reward
                .iter()
                .zip(next_q.column(0))
                .map(|(&r, &q)| td_target(r, q, gamma)),
        ))
    }

    /// Mean squared TD error and its gradient w.r.t. the critic parameters.
    pub fn critic_loss_and_grad(
        &self,
        shared: &SharedBatch,
        batch: &AgentBatch,
        targets: &Array1<f64>,
    ) -> Result<(f64, Vec<f64>)> {
        let n = targets.len() as f64;
        let input = critic_batch(shared.state.view(), batch.action.view());
        let (q, cache) = self.critic.forward(input.view())?;
        let err = &q.column(0) - targets;
        let loss = err.mapv(|e| e * e).sum() / n;
        let dq = err.mapv(|e| 2.0 * e / n).insert_axis(Axis(1));
        let grads = self.critic.backward(&cache, dq.view())?;
        Ok((loss, grads.params))
    }

    /// Batch-mean `Q(s, pi(s_i))` and its gradient w.r.t. the actor
    /// parameters, chained through the action columns of the critic input.
    pub fn actor_objective_and_grad(&self, shared: &SharedBatch, batch: &AgentBatch) -> Result<(f64, Vec<f64>)> {
        let n = batch.local.nrows();
        let (action, actor_cache) = self.actor.forward(batch.local.view())?;
        let input = critic_batch(shared.state.view(), action.view());
        let (q, critic_cache) = self.critic.forward(input.view())?;
        let mean_q = q.mean().unwrap_or(0.0);
        let dq = Array2::from_elem((n, 1), 1.0 / n as f64);
        let critic_grads = self.critic.backward(&critic_cache, dq.view())?;
        let global_dim = self.global_dim();
        let d_action = critic_grads.input.slice(s![.., global_dim..]);
        let actor_grads = self.actor.backward(&actor_cache, d_action)?;
        Ok((mean_q, actor_grads.params))
    }

    /// One descent step on the critic; returns the pre-update loss.
    pub fn update_critic(&mut self, shared: &SharedBatch, batch: &AgentBatch, gamma: f64) -> Result<f64> {
        let targets = self.td_targets(shared, batch, gamma)?;
        let (loss, grad) = self.critic_loss_and_grad(shared, batch, &targets)?;
        self.critic_opt
            .step(self.critic.params_mut(), &grad, Direction::Descent)?;
        Ok(loss)
    }

    /// One ascent step on the actor; returns the pre-update batch-mean Q.
    pub fn update_actor(&mut self, shared: &SharedBatch, batch: &AgentBatch) -> Result<f64> {
        let (mean_q, grad) = self.actor_objective_and_grad(shared, batch)?;
        self.actor_opt.step(self.actor.params_mut(), &grad, Direction::Ascent)?;
        Ok(mean_q)
    }

    pub fn soft_update_targets(&mut self, tau: f64) -> Result<()> {
        soft_update(&self.actor, &mut self.target_actor, tau)?;
        soft_update(&self.critic, &mut self.target_critic, tau)
    }
}
