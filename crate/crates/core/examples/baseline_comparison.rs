// Evaluates the three non-learning policies on the default four-slice
// scenario over a long horizon and prints the comparison table.

use edgeslice::harness::{compare, run_eval, ComparisonTable, ExperimentConfig, PolicyKind, LONG_EVAL_HORIZON};
use edgeslice::Result;

pub fn run_example() -> Result<ComparisonTable> {
    let mut config = ExperimentConfig {
        seeds: vec![1, 2, 3],
        eval_horizon: LONG_EVAL_HORIZON,
        ..ExperimentConfig::default()
    };
    let mut summaries = Vec::new();
    for policy in [PolicyKind::Static, PolicyKind::Random, PolicyKind::Over] {
        config.policy = policy;
        summaries.push(run_eval(&config, None)?);
    }
    let table = compare(&summaries)?;
    print!("{table}");
    if let Some(r) = table.ratio(PolicyKind::Static, PolicyKind::Random) {
        println!("static / random average: {r:.3}");
    }
    Ok(table)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
