// Retires one of four agents: every survivor is replaced by the averaged
// model, so the three remaining policies start out identical, then they are
// fine-tuned on the three-slice environment.

use edgeslice::env::{EnvConfig, SliceEnv, LOCAL_OBS_DIM};
use edgeslice::incremental::{incremental_train, Transition, DEFAULT_FRACTION};
use edgeslice::maddpg::{init_agents, tail_mean_reward, train, AgentConfig, TrainOptions, TrainSchedule};
use edgeslice::Result;

pub struct ShrinkReport {
    pub identical_at_start: bool,
    pub base_tail: f64,
    pub shrunk_tail: f64,
    pub fine_tune_steps: usize,
}

pub fn run_example() -> Result<ShrinkReport> {
    let seed = 5;
    let options = TrainOptions {
        schedule: TrainSchedule {
            observe_steps: 100,
            explore_steps: 400,
            train_steps: 400,
            batch_size: 64,
            ..TrainSchedule::default()
        },
        ..TrainOptions::default()
    };
    let agent_config = AgentConfig::default();
    let mut env = SliceEnv::new(EnvConfig::default(), 4, seed)?;
    let mut agents = init_agents(&env, &agent_config, seed)?;
    let base_trace = train(&mut env, &mut agents, &options, seed)?;

    let (mut survivors, generalized) = Transition::Shrink(3).apply(agents, 8, agent_config.optimizer)?;
    let obs = [0.3; LOCAL_OBS_DIM];
    let first = survivors[0].policy(&obs);
    let identical_at_start = survivors
        .iter()
        .all(|a| a.actor == generalized.actor && a.policy(&obs) == first);
    println!(
        "averaged {} agents; survivors identical: {identical_at_start}",
        generalized.source_count
    );

    let mut env = SliceEnv::new(EnvConfig::default(), 3, seed)?;
    let trace = incremental_train(&mut env, &mut survivors, &options, DEFAULT_FRACTION, 32, seed)?;
    let (base_tail, shrunk_tail) = (tail_mean_reward(&base_trace, 0.1), tail_mean_reward(&trace, 0.1));
    println!(
        "4-slice tail reward {base_tail:+.4}; 3-slice after {} steps {shrunk_tail:+.4}",
        trace.len()
    );
    Ok(ShrinkReport {
        identical_at_start,
        base_tail,
        shrunk_tail,
        fine_tune_steps: trace.len(),
    })
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
