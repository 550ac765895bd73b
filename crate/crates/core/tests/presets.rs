use std::path::{Path, PathBuf};

use edgeslice::harness::{ExperimentConfig, ScenarioPlan, DEFAULT_EVAL_HORIZON, LONG_EVAL_HORIZON};

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets")
}

fn load(name: &str) -> ExperimentConfig {
    let c = ExperimentConfig::load(&presets().join(name)).unwrap();
    c.validate().unwrap();
    c
}

#[test]
fn every_preset_parses_and_validates() {
    let mut n = 0;
    for entry in std::fs::read_dir(presets()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.starts_with("fig6") {
            continue;
        }
        load(&name);
        n += 1;
    }
    assert_eq!(n, 11);
}

#[test]
fn comparison_presets_differ_only_in_horizon() {
    let short = load("table3_comparison.json");
    let long = load("table3_comparison_long.json");
    assert_eq!(short.eval_horizon, DEFAULT_EVAL_HORIZON);
    assert_eq!(long.eval_horizon, LONG_EVAL_HORIZON);
    assert_eq!(short.num_slices, 4);
    assert_eq!(
        ExperimentConfig {
            eval_horizon: 0,
            ..short
        },
        ExperimentConfig {
            eval_horizon: 0,
            ..long
        }
    );
}

#[test]
fn dependency_plan_matches_the_scenario_configs() {
    let plan = ScenarioPlan::load(&presets().join("fig6_dependencies.json")).unwrap();
    assert_eq!(plan.scenarios.len(), 9);
    let bases: Vec<usize> = plan
        .scenarios
        .iter()
        .filter(|s| s.from.is_none())
        .map(|s| s.slices)
        .collect();
    assert_eq!(bases, [4, 5, 6, 3]);
    for node in &plan.scenarios {
        let config = load(&node.config);
        assert_eq!(config.incremental.fraction, 0.12);
        match &node.from {
            None => {
                assert_eq!(config.num_slices, node.slices, "{}", node.id);
                assert!(config.incremental.targets.is_empty());
            }
            Some(parent) => {
                let parent = plan.get(parent).unwrap();
                assert_eq!(config.num_slices, parent.slices, "{}", node.id);
                assert_eq!(config.incremental.targets.last(), Some(&node.slices), "{}", node.id);
                assert_eq!(config.incremental.batch_size, 200);
                let base = plan.get(node.compare_with.as_deref().unwrap()).unwrap();
                assert!(base.from.is_none() && base.slices == node.slices);
            }
        }
    }
}

#[test]
fn malformed_plans_are_rejected() {
    let text = std::fs::read_to_string(presets().join("fig6_dependencies.json")).unwrap();
    let mut plan: ScenarioPlan = serde_json::from_str(&text).unwrap();
    plan.scenarios[0].from = Some("h".into());
    plan.scenarios[0].slices = 5;
    assert!(plan.validate().is_err());
    let mut plan: ScenarioPlan = serde_json::from_str(&text).unwrap();
    plan.scenarios[1].from = Some("zz".into());
    assert!(plan.validate().is_err());
}
