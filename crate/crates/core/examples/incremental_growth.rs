// Trains a four-slice base session, grows it to five agents by parameter
// averaging and fine-tunes with 12% of the base schedule. Writes both
// sessions under a temporary directory and follows the manifest link back.

use edgeslice::harness::{
    load_manifest, plan_transitions, run_incremental, run_train, seed_dir, ExperimentConfig, SessionManifest,
};
use edgeslice::maddpg::TrainSchedule;
use edgeslice::Result;

pub struct GrowthReport {
    pub base: SessionManifest,
    pub grown: SessionManifest,
}

pub fn run_example() -> Result<GrowthReport> {
    let dir = tempfile::tempdir()?;
    let mut config = ExperimentConfig::default();
    config.training.schedule = TrainSchedule {
        observe_steps: 100,
        explore_steps: 400,
        train_steps: 400,
        batch_size: 64,
        ..TrainSchedule::default()
    };
    config.incremental.batch_size = 32;
    run_train(&config, &dir.path().join("base"))?;
    let base = load_manifest(&seed_dir(&dir.path().join("base"), 1))?;
    let plan = plan_transitions(base.num_slices, &[5]);
    let grown = run_incremental(&config, &dir.path().join("base"), &plan, &dir.path().join("grow"), None)?.remove(0);
    let link = grown
        .manifest
        .parent
        .clone()
        .expect("fine-tuning sessions link to a parent");
    println!(
        "base: {} agents, {} steps, tail reward {:+.4}",
        base.num_slices, base.trace_steps, base.tail_reward
    );
    println!(
        "grown: {} agents, {} steps ({:.1}% of base), tail reward {:+.4}",
        grown.manifest.num_slices,
        grown.manifest.trace_steps,
        100.0 * grown.manifest.trace_steps as f64 / base.trace_steps as f64,
        grown.manifest.tail_reward
    );
    println!("parent {} ({} -> {})", link.manifest, link.from, link.to);
    Ok(GrowthReport {
        base,
        grown: grown.manifest,
    })
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
