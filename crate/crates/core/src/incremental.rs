//! Changing the number of agents: parameter averaging into a generalized
//! model, spawning or retiring agents, and short fine-tuning runs.

use serde::{Deserialize, Serialize};

use crate::env::SliceEnv;
use crate::error::{Error, Result};
use crate::maddpg::{train, Agent, TraceRow, TrainOptions, TrainSchedule};
use crate::nn::{AdamConfig, Mlp};

/// Share of the base schedule used for fine-tuning after a transition.
pub const DEFAULT_FRACTION: f64 = 0.12;
/// Batch size for fine-tuning runs.
pub const DEFAULT_INCREMENTAL_BATCH: usize = 200;

/// Elementwise mean of a population of agents.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedModel {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    pub source_count: usize,
    /// Free-form reference to where the source agents came from, usually a manifest path.
    pub provenance: Option<String>,
}

fn mean_network<'a>(nets: impl Iterator<Item = &'a Mlp>, context: &str) -> Result<Mlp> {
    let mut nets = nets.peekable();
    let first = nets
        .peek()
        .copied()
        .ok_or_else(|| Error::Count(format!("cannot average {context}: no agents")))?;
    // Running mean: exact for identical inputs, unlike sum-then-divide.
    let mut out = first.clone();
    for (k, net) in nets.enumerate() {
        if !net.same_shape(first) {
            return Err(Error::ShapeMismatch(format!(
                "{context} of agent {k} has layer sizes {:?}, expected {:?}",
                net.sizes(),
                first.sizes()
            )));
        }
        let n = (k + 1) as f64;
        for (m, &p) in out.params_mut().iter_mut().zip(net.params()) {
            *m += (p - *m) / n;
        }
    }
    Ok(out)
}

/// Averages actors, critics and both target networks over `agents`.
pub fn average_params(agents: &[Agent]) -> Result<GeneralizedModel> {
    Ok(GeneralizedModel {
        actor: mean_network(agents.iter().map(|a| &a.actor), "actor")?,
        critic: mean_network(agents.iter().map(|a| &a.critic), "critic")?,
        target_actor: mean_network(agents.iter().map(|a| &a.target_actor), "target actor")?,
        target_critic: mean_network(agents.iter().map(|a| &a.target_critic), "target critic")?,
        source_count: agents.len(),
        provenance: None,
    })
}

impl GeneralizedModel {
    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = Some(provenance.into());
        self
    }

    /// A fresh agent carrying the averaged mains. Targets start equal to the
    /// mains and optimizer moments start at zero.
    pub fn spawn(&self, slice_id: usize, optimizer: AdamConfig) -> Agent {
        Agent::from_networks(slice_id, self.actor.clone(), self.critic.clone(), optimizer)
    }
}

/// Adds agents carrying the generalized model until there are `new_count`.
/// Existing agents are returned untouched.
pub fn grow(
    mut agents: Vec<Agent>,
    new_count: usize,
    max_slices: usize,
    generalized: &GeneralizedModel,
    optimizer: AdamConfig,
) -> Result<Vec<Agent>> {
    let current = agents.len();
    if new_count <= current {
        return Err(Error::Count(format!("grow to {new_count} from {current} agents")));
    }
    if new_count > max_slices {
        return Err(Error::Count(format!(
            "grow to {new_count} exceeds max_slices {max_slices}"
        )));
    }
    agents.extend((current..new_count).map(|id| generalized.spawn(id, optimizer)));
    Ok(agents)
}

/// Replaces the population with `new_count` copies of the generalized model.
pub fn shrink(
    agents: Vec<Agent>,
    new_count: usize,
    generalized: &GeneralizedModel,
    optimizer: AdamConfig,
) -> Result<Vec<Agent>> {
    let current = agents.len();
    if new_count >= current {
        return Err(Error::Count(format!("shrink to {new_count} from {current} agents")));
    }
    if new_count == 0 {
        return Err(Error::Count("shrink to zero agents".into()));
    }
    Ok((0..new_count).map(|id| generalized.spawn(id, optimizer)).collect())
}

/// Options for a fine-tuning run: every stage of `base` scaled by `fraction`
/// (rounded) with the given batch size.
pub fn incremental_options(base: &TrainOptions, fraction: f64, batch_size: usize) -> Result<TrainOptions> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("incremental fraction {fraction} outside (0, 1]")));
    }
    let schedule: TrainSchedule = base.schedule.scaled(fraction, batch_size);
    Ok(TrainOptions {
        schedule,
        ..base.clone()
    })
}

/// Fine-tunes transitioned agents on `env` with an empty replay buffer and
/// reset optimizer moments.
pub fn incremental_train(
    env: &mut SliceEnv,
    agents: &mut [Agent],
    base: &TrainOptions,
    fraction: f64,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<TraceRow>> {
    let options = incremental_options(base, fraction, batch_size)?;
    for agent in agents.iter_mut() {
        agent.reset_optimizers();
    }
    train(env, agents, &options, seed)
}

/// Direction and size of an agent-count change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "to", rename_all = "lowercase")]
pub enum Transition {
    Grow(usize),
    Shrink(usize),
}

impl Transition {
    pub fn target(self) -> usize {
        match self {
            Transition::Grow(n) | Transition::Shrink(n) => n,
        }
    }

    /// Averages `agents` and applies the transition.
    pub fn apply(
        self,
        agents: Vec<Agent>,
        max_slices: usize,
        optimizer: AdamConfig,
    ) -> Result<(Vec<Agent>, GeneralizedModel)> {
        let generalized = average_params(&agents)?;
        let out = match self {
            Transition::Grow(n) => grow(agents, n, max_slices, &generalized, optimizer)?,
            Transition::Shrink(n) => shrink(agents, n, &generalized, optimizer)?,
        };
        Ok((out, generalized))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maddpg::AgentConfig;
    use crate::nn::Activation;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn population(n: usize, seed: u64) -> Vec<Agent> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| Agent::new(i, 49, &AgentConfig::default(), &mut rng).unwrap())
            .collect()
    }

    fn tiny_agent(actor: [f64; 2]) -> Agent {
        let mut a = Mlp::zeros(&[1, 1], &[Activation::Identity]).unwrap();
        a.set_params(&actor).unwrap();
        let c = Mlp::zeros(&[1, 1], &[Activation::Identity]).unwrap();
        Agent::from_networks(0, a, c, AdamConfig::default())
    }

    #[test]
    fn two_agents_average_to_midpoint() {
        let g = average_params(&[tiny_agent([0.2, 0.4]), tiny_agent([0.6, 0.8])]).unwrap();
        assert!((g.actor.params()[0] - 0.4).abs() < 1e-15);
        assert!((g.actor.params()[1] - 0.6).abs() < 1e-15);
        assert_eq!(g.source_count, 2);
    }

    #[test]
    fn single_and_identical_agents_are_fixed_points() {
        let one = population(1, 1);
        let g = average_params(&one).unwrap();
        assert_eq!(g.actor, one[0].actor);
        assert_eq!(g.critic, one[0].critic);
        let same = vec![one[0].clone(); 3];
        let g = average_params(&same).unwrap();
        assert_eq!(g.actor, one[0].actor);
    }

    #[test]
    fn mismatched_shapes_and_empty_populations_are_rejected() {
        let mut agents = population(2, 2);
        agents[1].actor = Mlp::zeros(&[10, 8, 5], &[Activation::Relu, Activation::Sigmoid]).unwrap();
        assert!(matches!(average_params(&agents), Err(Error::ShapeMismatch(_))));
        assert!(average_params(&[]).is_err());
    }

    #[test]
    fn grow_keeps_survivors_and_spawns_generalized_agents() {
        let agents = population(4, 3);
        let g = average_params(&agents).unwrap();
        let grown = grow(agents.clone(), 6, 8, &g, AdamConfig::default()).unwrap();
        assert_eq!(grown.len(), 6);
        assert_eq!(&grown[..4], &agents[..]);
        for (id, a) in grown[4..].iter().enumerate() {
            assert_eq!(a.slice_id, 4 + id);
            assert_eq!(a.actor, g.actor);
            assert_eq!(a.target_critic, g.critic);
            assert_eq!(a.actor_opt.steps(), 0);
        }
        assert!(matches!(
            grow(agents.clone(), 4, 8, &g, AdamConfig::default()),
            Err(Error::Count(_))
        ));
        assert!(matches!(
            grow(agents, 9, 8, &g, AdamConfig::default()),
            Err(Error::Count(_))
        ));
    }

    #[test]
    fn shrink_gives_every_survivor_the_generalized_model() {
        let agents = population(4, 4);
        let g = average_params(&agents).unwrap();
        let shrunk = shrink(agents.clone(), 3, &g, AdamConfig::default()).unwrap();
        assert_eq!(shrunk.len(), 3);
        assert!(shrunk.iter().all(|a| a.actor == g.actor && a.critic == g.critic));
        assert_eq!(shrink(agents.clone(), 1, &g, AdamConfig::default()).unwrap().len(), 1);
        assert!(matches!(
            shrink(agents.clone(), 4, &g, AdamConfig::default()),
            Err(Error::Count(_))
        ));
        assert!(matches!(
            shrink(agents, 0, &g, AdamConfig::default()),
            Err(Error::Count(_))
        ));
    }

    #[test]
    fn schedule_budget_scales_to_twelve_percent() {
        let opts = incremental_options(&TrainOptions::default(), DEFAULT_FRACTION, DEFAULT_INCREMENTAL_BATCH).unwrap();
        let s = opts.schedule;
        assert_eq!(
            (s.observe_steps, s.explore_steps, s.train_steps, s.batch_size),
            (36, 240, 240, 200)
        );
        let full = incremental_options(&TrainOptions::default(), 1.0, 300).unwrap();
        assert_eq!(full, TrainOptions::default());
        assert!(incremental_options(&TrainOptions::default(), 0.0, 200).is_err());
    }

    #[test]
    fn transition_reports_target() {
        assert_eq!(Transition::Grow(5).target(), 5);
        let json = serde_json::to_string(&Transition::Shrink(3)).unwrap();
        assert_eq!(json, r#"{"kind":"shrink","to":3}"#);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn averaging_is_linear(seed in 0u64..500, n in 1usize..5, c in -3.0f64..3.0) {
            let agents = population(n, seed);
            let scaled: Vec<Agent> = agents
                .iter()
                .map(|a| {
                    let mut a = a.clone();
                    a.actor.params_mut().iter_mut().for_each(|p| *p *= c);
                    a
                })
                .collect();
            let g = average_params(&agents).unwrap();
            let gs = average_params(&scaled).unwrap();
            for (x, y) in g.actor.params().iter().zip(gs.actor.params()) {
                prop_assert!((c * x - y).abs() <= 1e-12 * (c * x).abs().max(1e-300) + 1e-15);
            }
        }

        #[test]
        fn grow_then_shrink_equals_mean_of_grown_population(seed in 0u64..500, n in 1usize..5) {
            let agents = population(n, seed);
            let g = average_params(&agents).unwrap();
            let grown = grow(agents, n + 1, 8, &g, AdamConfig::default()).unwrap();
            let g2 = average_params(&grown).unwrap();
            let shrunk = shrink(grown.clone(), n, &g2, AdamConfig::default()).unwrap();
            // Direct elementwise-mean oracle over the grown population.
            for k in 0..g2.actor.num_params() {
                let mean = grown.iter().map(|a| a.actor.params()[k]).sum::<f64>() / grown.len() as f64;
                for a in &shrunk {
                    prop_assert!((a.actor.params()[k] - mean).abs() <= 1e-12 * mean.abs().max(1e-12));
                }
            }
        }
    }
}
