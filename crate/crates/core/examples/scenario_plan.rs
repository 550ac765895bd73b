// Loads the shipped dependency map of base and incremental scenarios and
// prints a run order in which every scenario follows the one it starts from.

use std::path::Path;

use edgeslice::harness::{ExperimentConfig, ScenarioPlan};
use edgeslice::Result;

pub fn run_example() -> Result<Vec<String>> {
    let presets = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let plan = ScenarioPlan::load(&presets.join("fig6_dependencies.json"))?;
    let order: Vec<String> = plan.order()?.into_iter().map(String::from).collect();
    for id in &order {
        let node = plan.get(id).expect("ordered ids come from the plan");
        let config = ExperimentConfig::load(&presets.join(&node.config))?;
        let source = match &node.from {
            Some(parent) => format!(
                "from ({parent}), {} -> {:?}",
                config.num_slices, config.incremental.targets
            ),
            None => format!("from scratch, {} slices", config.num_slices),
        };
        let versus = node
            .compare_with
            .as_deref()
            .map(|c| format!(", compare with ({c})"))
            .unwrap_or_default();
        println!("({id}) {:<32} {source}{versus}", node.title);
    }
    Ok(order)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
