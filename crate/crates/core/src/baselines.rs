//! Non-learning allocation policies producing actions on the same `[0, 1]^5`
//! scale as the actors.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Action, ACTION_DIM};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Random,
    OverAllocation,
    StaticSlicing,
}

#[derive(Clone, Debug)]
pub enum BaselinePolicy {
    /// Every component uniform in `[0, 1]`.
    Random(ChaCha8Rng),
    /// Constant all-ones action: the full per-slice cap everywhere.
    OverAllocation,
    /// Equal partition: `1/I` of each resource, expressed on the action scale.
    StaticSlicing { level: f64 },
}

/// Action level granting `1/num_slices` of a resource when the per-slice cap
/// is `cap_fraction` of it, clipped to 1.
pub fn static_share_level(num_slices: usize, cap_fraction: f64) -> Result<f64> {
    if num_slices == 0 {
        return Err(Error::Count("static slicing needs at least one slice".into()));
    }
    if !(cap_fraction > 0.0 && cap_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "slice cap fraction {cap_fraction} outside (0, 1]"
        )));
    }
    Ok((1.0 / (num_slices as f64 * cap_fraction)).min(1.0))
}

impl BaselinePolicy {
    /// Random policy drawing from the `Policy` stream of `seed`.
    pub fn random(seed: u64) -> Self {
        BaselinePolicy::Random(stream_rng(seed, Stream::Policy))
    }

    pub fn static_slicing(num_slices: usize, cap_fraction: f64) -> Result<Self> {
        Ok(BaselinePolicy::StaticSlicing {
            level: static_share_level(num_slices, cap_fraction)?,
        })
    }

    pub fn new(kind: BaselineKind, num_slices: usize, cap_fraction: f64, seed: u64) -> Result<Self> {
        match kind {
            BaselineKind::Random => Ok(Self::random(seed)),
            BaselineKind::OverAllocation => Ok(BaselinePolicy::OverAllocation),
            BaselineKind::StaticSlicing => Self::static_slicing(num_slices, cap_fraction),
        }
    }

    pub fn kind(&self) -> BaselineKind {
        match self {
            BaselinePolicy::Random(_) => BaselineKind::Random,
            BaselinePolicy::OverAllocation => BaselineKind::OverAllocation,
            BaselinePolicy::StaticSlicing { .. } => BaselineKind::StaticSlicing,
        }
    }

    pub fn action(&mut self) -> Action {
        match self {
            BaselinePolicy::Random(rng) => std::array::from_fn(|_| rng.random::<f64>()),
            BaselinePolicy::OverAllocation => [1.0; ACTION_DIM],
            BaselinePolicy::StaticSlicing { level } => [*level; ACTION_DIM],
        }
    }

    /// One action per slice, in slice order.
    pub fn actions(&mut self, num_slices: usize) -> Vec<Action> {
        (0..num_slices).map(|_| self.action()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{AllocationGrant, EnvConfig, SliceEnv, SliceStatus, Topology};

    #[test]
    fn random_policy_is_seeded_and_bounded() {
        let mut a = BaselinePolicy::random(9);
        let mut b = BaselinePolicy::random(9);
        let xs = a.actions(50);
        assert_eq!(xs, b.actions(50));
        assert!(xs.iter().flatten().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn random_compute_grant_averages_twenty_ghz() {
        let topo = Topology::ring(4);
        let mut policy = BaselinePolicy::random(3);
        let n = 40_000;
        let mut total = 0.0;
        for _ in 0..n {
            let g = AllocationGrant::from_action(0, &policy.action(), &topo, 0.4, 0);
            total += g.compute_alloc[0];
        }
        let mean = total / n as f64;
        // Uniform on [0, 40]: sd 11.55, standard error 0.058.
        assert!(
            (mean - 20.0).abs() < 4.0 * 40.0 / 12f64.sqrt() / (n as f64).sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn over_allocation_grants_two_fifths_of_each_cap() {
        let topo = Topology::ring(4);
        let g = AllocationGrant::from_action(0, &BaselinePolicy::OverAllocation.action(), &topo, 0.4, 0);
        assert!(g.compute_alloc.iter().all(|&c| (c - 40.0).abs() < 1e-9));
        assert!(g.bandwidth_alloc.iter().all(|&b| (b - 4.0).abs() < 1e-9));
    }

    #[test]
    fn over_allocation_fails_the_third_slice_on_a_shared_mec() {
        // Slices 0, 1 and 2 of the default ring all use MEC 2.
        let mut env = SliceEnv::new(EnvConfig::default(), 3, 1).unwrap();
        let out = env.step(&BaselinePolicy::OverAllocation.actions(3)).unwrap();
        assert!(out.statuses[0].is_served() && out.statuses[1].is_served());
        assert!(matches!(out.statuses[2], SliceStatus::Failed(_)));
    }

    #[test]
    fn static_levels() {
        assert_eq!(static_share_level(4, 0.4).unwrap(), 0.625);
        assert_eq!(static_share_level(2, 0.4).unwrap(), 1.0);
        assert!(static_share_level(0, 0.4).is_err());
        let topo = Topology::ring(4);
        let mut policy = BaselinePolicy::static_slicing(4, 0.4).unwrap();
        let g = AllocationGrant::from_action(0, &policy.action(), &topo, 0.4, 0);
        assert!(g.compute_alloc.iter().all(|&c| (c - 25.0).abs() < 1e-9));
    }

    #[test]
    fn unclipped_static_partition_never_overdraws_in_one_slot() {
        let mut env = SliceEnv::new(
            EnvConfig {
                occupancy: crate::env::OccupancyRule::OneSlot,
                ..EnvConfig::default()
            },
            4,
            2,
        )
        .unwrap();
        let mut policy = BaselinePolicy::static_slicing(4, 0.4).unwrap();
        for _ in 0..200 {
            let out = env.step(&policy.actions(4)).unwrap();
            assert!(out.statuses.iter().all(SliceStatus::is_served));
        }
    }
}
