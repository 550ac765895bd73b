//! Multi-agent DDPG: one actor-critic pair per slice. Critics see the global
//! state plus their own agent's action, so their input width does not depend
//! on how many agents exist.

mod agent;
mod noise;
mod replay;
mod train;

pub use agent::{critic_input, soft_update, td_target, Agent, AgentBatch, AgentConfig, SharedBatch};
pub use noise::{OuNoise, OuParams};
pub use replay::{ReplayBuffer, Transition, DEFAULT_REPLAY_CAPACITY};
pub use train::{
    init_agents, tail_mean_reward, train, write_trace_csv, RewardMode, Stage, TraceRow, TrainOptions, TrainSchedule,
};
