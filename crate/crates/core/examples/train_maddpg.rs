// Trains one agent per slice on the default four-slice scenario and
// evaluates the deterministic policies against static slicing.
// Runs a shortened schedule; pass `--full` for the default (300, 2000, 2000).

use edgeslice::harness::{evaluate_agents, evaluate_baseline, train_cell, ExperimentConfig, PolicyKind};
use edgeslice::maddpg::{tail_mean_reward, Stage, TrainSchedule};
use edgeslice::Result;

pub struct TrainReport {
    pub steps: usize,
    pub tail_reward: f64,
    pub maddpg_utility: f64,
    pub static_utility: f64,
}

pub fn run_with(schedule: TrainSchedule) -> Result<TrainReport> {
    let mut config = ExperimentConfig {
        eval_horizon: 1000,
        ..ExperimentConfig::default()
    };
    config.training.schedule = schedule;
    let seed = 1;
    let (agents, trace) = train_cell(&config, seed)?;
    for stage in [Stage::Observe, Stage::Explore, Stage::Train] {
        let rows: Vec<f64> = trace
            .iter()
            .filter(|r| r.stage == stage)
            .map(|r| r.shared_reward)
            .collect();
        if !rows.is_empty() {
            let mean = rows.iter().sum::<f64>() / rows.len() as f64;
            println!(
                "{:<8} {:5} steps, mean shared reward {mean:+.4}",
                stage.as_str(),
                rows.len()
            );
        }
    }
    let maddpg = evaluate_agents(&config, &agents, seed)?;
    let fixed = evaluate_baseline(&config, PolicyKind::Static, seed)?;
    println!(
        "eval over {} slots: maddpg {:.4} (var {:.4}), static {:.4} (var {:.4})",
        config.eval_horizon, maddpg.stats.average, maddpg.stats.variance, fixed.stats.average, fixed.stats.variance
    );
    Ok(TrainReport {
        steps: trace.len(),
        tail_reward: tail_mean_reward(&trace, 0.1),
        maddpg_utility: maddpg.stats.average,
        static_utility: fixed.stats.average,
    })
}

pub fn short_schedule() -> TrainSchedule {
    TrainSchedule {
        observe_steps: 100,
        explore_steps: 400,
        train_steps: 400,
        batch_size: 64,
        ..TrainSchedule::default()
    }
}

pub fn run_example() -> Result<TrainReport> {
    run_with(short_schedule())
}

fn main() -> Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    let schedule = if full {
        TrainSchedule::default()
    } else {
        short_schedule()
    };
    run_with(schedule).map(|_| ())
}
