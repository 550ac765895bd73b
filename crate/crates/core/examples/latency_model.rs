// Scores one hand-built request under a few allocations, then steps the
// default four-slice environment with equal shares and prints each slice's
// outcome.

use edgeslice::baselines::BaselinePolicy;
use edgeslice::env::{
    compute_energy, compute_latency, served_reward, AllocationGrant, EnvConfig, SliceEnv, SliceRequest, SliceStatus,
    Topology,
};
use edgeslice::Result;

pub struct LatencyReport {
    /// (action level, total latency in seconds, energy in joules)
    pub sweep: Vec<(f64, f64, f64)>,
    pub served: usize,
    pub failed: usize,
}

pub fn run_example() -> Result<LatencyReport> {
    let topology = Topology::ring(4);
    let request = SliceRequest {
        slice_id: 0,
        compute_demand: [15.0, 12.0, 18.0],
        data_size: [1.5, 1.0],
        slot: 0,
    };
    let mut sweep = Vec::new();
    println!("level  latency(s)  compute(s)  transmit(s)  energy(J)");
    for level in [0.25, 0.5, 0.75, 1.0] {
        let grant = AllocationGrant::from_action(0, &[level; 5], &topology, 0.4, 0);
        let latency = compute_latency(&request, &grant, &topology)?;
        // Utilization from this grant alone.
        let utilization: Vec<f64> = grant
            .compute_alloc
            .iter()
            .zip(topology.path(0)?.mecs)
            .map(|(c, m)| c / topology.mec_capacity[m])
            .collect();
        let energy = compute_energy(&latency.per_mec, &utilization, &Default::default())?;
        println!(
            "{level:5.2}  {:10.4}  {:10.4}  {:11.4}  {energy:9.4}",
            latency.total, latency.compute, latency.transmission
        );
        sweep.push((level, latency.total, energy));
    }
    let (_, best_latency, best_energy) = sweep[3];
    println!(
        "reward of the slowest allocation against the fastest, 4 slices: {:.4}",
        served_reward(sweep[0].1, sweep[0].2, best_latency, best_energy, 4)
    );

    let mut env = SliceEnv::new(EnvConfig::default(), 4, 7)?;
    let mut policy = BaselinePolicy::static_slicing(4, 0.4)?;
    let (mut served, mut failed) = (0, 0);
    for slot in 0..5 {
        let out = env.step(&policy.actions(4))?;
        let marks: Vec<String> = out
            .statuses
            .iter()
            .zip(&out.rewards)
            .map(|(s, r)| match s {
                SliceStatus::Failed(_) => {
                    failed += 1;
                    format!("fail {r:+.3}")
                }
                _ => {
                    served += 1;
                    format!("ok {r:+.3}")
                }
            })
            .collect();
        println!("slot {slot}: shared {:+.3}  [{}]", out.shared_reward, marks.join(", "));
    }
    Ok(LatencyReport { sweep, served, failed })
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
