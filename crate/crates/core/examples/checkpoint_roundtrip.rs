// Trains a short session, writes it to disk, reloads it and checks that the
// reloaded policies act bit-identically.

use edgeslice::harness::{load_session, run_train, seed_dir, ExperimentConfig};
use edgeslice::maddpg::TrainSchedule;
use edgeslice::Result;

pub fn short_config() -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.training.schedule = TrainSchedule {
        observe_steps: 50,
        explore_steps: 100,
        train_steps: 100,
        batch_size: 32,
        ..TrainSchedule::default()
    };
    config
}

pub fn run_example() -> Result<bool> {
    let dir = tempfile::tempdir()?;
    let config = short_config();
    let trained = run_train(&config, dir.path())?.remove(0);
    let loaded = load_session(&seed_dir(dir.path(), 1), config.agent.optimizer)?;
    let obs = [0.5; edgeslice::env::LOCAL_OBS_DIM];
    let mut identical = true;
    for (a, b) in trained.agents.iter().zip(&loaded.agents) {
        let (x, y) = (a.policy(&obs), b.policy(&obs));
        identical &= x == y && a.critic == b.critic && a.target_actor == b.target_actor;
        println!("agent {}: action {:.4?}", a.slice_id, x);
    }
    println!(
        "{} agents reloaded from {}: {}",
        loaded.agents.len(),
        loaded.dir.display(),
        if identical { "bit-identical" } else { "DIFFERENT" }
    );
    Ok(identical)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
