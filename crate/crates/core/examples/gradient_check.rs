// Compares the analytic critic-loss and actor-objective gradients of a
// default agent against central finite differences on a random batch.

use edgeslice::env::{ACTION_DIM, LOCAL_OBS_DIM};
use edgeslice::maddpg::{Agent, AgentBatch, AgentConfig, SharedBatch};
use edgeslice::Result;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random::<f64>())
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

pub struct GradientReport {
    pub critic_max_rel_err: f64,
    pub actor_max_rel_err: f64,
    pub checked: usize,
}

pub fn run_example() -> Result<GradientReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let global_dim = 53;
    let agent = Agent::new(0, global_dim, &AgentConfig::default(), &mut rng)?;
    let rows = 16;
    let shared = SharedBatch {
        state: random_matrix(&mut rng, rows, global_dim),
        next_state: random_matrix(&mut rng, rows, global_dim),
    };
    let batch = AgentBatch {
        local: random_matrix(&mut rng, rows, LOCAL_OBS_DIM),
        action: random_matrix(&mut rng, rows, ACTION_DIM),
        reward: Array1::from_shape_fn(rows, |_| rng.random_range(-0.25..0.25)),
        next_local: random_matrix(&mut rng, rows, LOCAL_OBS_DIM),
    };
    let targets = agent.td_targets(&shared, &batch, 0.99)?;

    let (_, critic_grad) = agent.critic_loss_and_grad(&shared, &batch, &targets)?;
    let (_, actor_grad) = agent.actor_objective_and_grad(&shared, &batch)?;
    let samples = 40;
    let (mut critic_err, mut actor_err) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let k = rng.random_range(0..agent.critic.num_params());
        let mut probe = agent.clone();
        let base = probe.critic.params()[k];
        probe.critic.params_mut()[k] = base + STEP;
        let plus = probe.critic_loss_and_grad(&shared, &batch, &targets)?.0;
        probe.critic.params_mut()[k] = base - STEP;
        let minus = probe.critic_loss_and_grad(&shared, &batch, &targets)?.0;
        critic_err = critic_err.max(rel_err((plus - minus) / (2.0 * STEP), critic_grad[k]));

        let k = rng.random_range(0..agent.actor.num_params());
        let mut probe = agent.clone();
        let base = probe.actor.params()[k];
        probe.actor.params_mut()[k] = base + STEP;
        let plus = probe.actor_objective_and_grad(&shared, &batch)?.0;
        probe.actor.params_mut()[k] = base - STEP;
        let minus = probe.actor_objective_and_grad(&shared, &batch)?.0;
        actor_err = actor_err.max(rel_err((plus - minus) / (2.0 * STEP), actor_grad[k]));
    }
    println!(
        "critic: {} params, max relative error {critic_err:.2e}",
        agent.critic.num_params()
    );
    println!(
        "actor:  {} params, max relative error {actor_err:.2e}",
        agent.actor.num_params()
    );
    Ok(GradientReport {
        critic_max_rel_err: critic_err,
        actor_max_rel_err: actor_err,
        checked: samples,
    })
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
