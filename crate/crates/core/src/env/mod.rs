//! Discrete-time MEC slicing environment.
//!
//! Each call to [`SliceEnv::step`] consumes one action per active slice for the
//! requests that are currently pending (visible through the observations),
//! checks feasibility against the ledger in ascending slice order, computes
//! latency, energy and rewards, records the grants, and then advances the
//! clock: expired grants are released and the next slot's requests are drawn.
//! The observations returned afterwards therefore always describe the state a
//! policy acts on next.

mod ledger;
mod model;
mod topology;
mod trace;
mod window;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use ledger::{ActiveGrant, ResourceLedger};
pub use model::{
    compute_data_rate, compute_energy, compute_latency, failure_reward, from_units, served_reward, to_units,
    AllocationGrant, Latency, PowerModel, SliceRequest, MIN_ALLOCATION_FRACTION, UNITS_PER_WHOLE,
};
pub use topology::{SlicePath, Topology, ACTION_DIM, LINKS_PER_SLICE, LOCAL_OBS_DIM, MECS_PER_SLICE};
pub use trace::SlotTraceWriter;
pub use window::{NormalizationWindow, DEFAULT_WINDOW_SLOTS};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// One slice's share of its three MECs and two links, each in `[0, 1]`.
pub type Action = [f64; ACTION_DIM];
pub type LocalObs = [f64; LOCAL_OBS_DIM];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandRanges {
    /// Gcycles per used MEC, `[low, high]`.
    pub compute: [f64; 2],
    /// Gb per used link, `[low, high]`.
    pub data: [f64; 2],
}

impl Default for DemandRanges {
    fn default() -> Self {
        DemandRanges {
            compute: [10.0, 20.0],
            data: [1.0, 2.0],
        }
    }
}

/// How long a served grant keeps its resources.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OccupancyRule {
    /// `ceil(latency / slot_length)` slots, at most `max_slots`.
    Latency {
        max_slots: u32,
    },
    OneSlot,
}

impl Default for OccupancyRule {
    fn default() -> Self {
        OccupancyRule::Latency { max_slots: 5 }
    }
}

impl OccupancyRule {
    pub fn slots(&self, latency: f64, slot_length: f64) -> u32 {
        match *self {
            OccupancyRule::OneSlot => 1,
            OccupancyRule::Latency { max_slots } => {
                let slots = (latency / slot_length).ceil();
                if slots.is_finite() {
                    (slots as u32).clamp(1, max_slots.max(1))
                } else {
                    max_slots.max(1)
                }
            }
        }
    }
}

fn default_slot_length() -> f64 {
    1.0
}
fn default_arrival_prob() -> f64 {
    1.0
}
fn default_window_slots() -> u64 {
    DEFAULT_WINDOW_SLOTS
}
fn default_max_slices() -> usize {
    8
}
fn default_topology() -> Topology {
    Topology::ring(default_max_slices())
}
fn default_cap_fraction() -> f64 {
    0.4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    #[serde(default = "default_topology")]
    pub topology: Topology,
    #[serde(default)]
    pub demand: DemandRanges,
    #[serde(default)]
    pub occupancy: OccupancyRule,
    /// Seconds per slot.
    #[serde(default = "default_slot_length")]
    pub slot_length: f64,
    /// Probability that an active slice issues a request in a slot.
    #[serde(default = "default_arrival_prob")]
    pub arrival_prob: f64,
    #[serde(default)]
    pub power: PowerModel,
    #[serde(default = "default_window_slots")]
    pub window_slots: u64,
    /// Observation padding; also the upper bound on the active slice count.
    #[serde(default = "default_max_slices")]
    pub max_slices: usize,
    /// Largest share of J or B a single slice may receive.
    #[serde(default = "default_cap_fraction")]
    pub slice_cap_fraction: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        let max_slices = default_max_slices();
        EnvConfig {
            topology: default_topology(),
            demand: DemandRanges::default(),
            occupancy: OccupancyRule::default(),
            slot_length: default_slot_length(),
            arrival_prob: default_arrival_prob(),
            power: PowerModel::default(),
            window_slots: default_window_slots(),
            max_slices,
            slice_cap_fraction: default_cap_fraction(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.topology.slice_paths.len() < self.max_slices {
            return cfg(format!(
                "{} slice paths configured but max_slices is {}",
                self.topology.slice_paths.len(),
                self.max_slices
            ));
        }
        for (name, [lo, hi]) in [("compute", self.demand.compute), ("data", self.demand.data)] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi > 0.0) {
                return cfg(format!("{name} demand range [{lo}, {hi}] is invalid"));
            }
        }
        if !(self.slot_length > 0.0 && self.slot_length.is_finite()) {
            return cfg("slot_length must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.arrival_prob) {
            return cfg("arrival_prob must lie in [0, 1]".into());
        }
        if !(self.slice_cap_fraction > 0.0 && self.slice_cap_fraction <= 1.0) {
            return cfg("slice_cap_fraction must lie in (0, 1]".into());
        }
        if self.power.p_static < 0.0 || self.power.p_dynamic < 0.0 {
            return cfg("power model coefficients must be non-negative".into());
        }
        if let OccupancyRule::Latency { max_slots: 0 } = self.occupancy {
            return cfg("max_slots must be at least 1".into());
        }
        Ok(())
    }

    /// Critic state width: remaining compute per MEC, remaining bandwidth per
    /// link and a five-value request block for every potential slice.
    pub fn global_obs_dim(&self) -> usize {
        self.topology.num_mecs() + self.topology.num_links() + ACTION_DIM * self.max_slices
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureReason {
    /// Some used MEC or link got (almost) nothing.
    BelowMinimum,
    /// The grant would exceed what is left on some used MEC or link.
    Overdraw,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SliceStatus {
    /// No request this slot.
    Idle,
    Served {
        latency: Latency,
        energy: f64,
        grant: AllocationGrant,
    },
    Failed(FailureReason),
}

impl SliceStatus {
    pub fn is_served(&self) -> bool {
        matches!(self, SliceStatus::Served { .. })
    }
}

/// Result of one slot.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub slot: u64,
    pub statuses: Vec<SliceStatus>,
    /// Per-agent training reward.
    pub rewards: Vec<f64>,
    /// Sum of `rewards`.
    pub shared_reward: f64,
    /// Per-slice evaluation utility (failures count as 0).
    pub utilities: Vec<f64>,
    /// Window minima after inserting this slot's samples.
    pub min_latency: f64,
    pub min_energy: f64,
}

impl StepOutcome {
    pub fn served(&self) -> impl Iterator<Item = bool> + '_ {
        self.statuses.iter().map(SliceStatus::is_served)
    }
}

/// Per-slot evaluation utility: served slices score as in the reward, failed
/// ones score zero instead of the penalty.
pub fn eval_utility(outcome: &StepOutcome) -> f64 {
    outcome.utilities.iter().sum()
}

/// The environment instance. Owns its ledger, window and request stream.
#[derive(Clone, Debug)]
pub struct SliceEnv {
    config: EnvConfig,
    num_slices: usize,
    slot: u64,
    ledger: ResourceLedger,
    window: NormalizationWindow,
    pending: Vec<Option<SliceRequest>>,
    rng: ChaCha8Rng,
}

impl SliceEnv {
    /// Builds an environment with `num_slices` active slices (ids
    /// `0..num_slices`) and draws the first slot's requests.
    pub fn new(config: EnvConfig, num_slices: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        if num_slices > config.max_slices {
            return Err(Error::Count(format!(
                "{num_slices} slices exceed max_slices {}",
                config.max_slices
            )));
        }
        let mut env = SliceEnv {
            ledger: ResourceLedger::new(&config.topology),
            window: NormalizationWindow::new(config.window_slots),
            pending: Vec::new(),
            rng: stream_rng(seed, Stream::Requests),
            num_slices,
            slot: 0,
            config,
        };
        env.pending = env.draw_requests();
        Ok(env)
    }

    fn draw_requests(&mut self) -> Vec<Option<SliceRequest>> {
        let DemandRanges { compute, data } = self.config.demand;
        (0..self.num_slices)
            .map(|slice_id| {
                // Always consume the same number of draws so streams stay
                // aligned across arrival probabilities.
                let arrives = self.rng.random::<f64>() < self.config.arrival_prob;
                let compute_demand: [f64; MECS_PER_SLICE] =
                    std::array::from_fn(|_| self.rng.random_range(compute[0]..=compute[1]));
                let data_size: [f64; LINKS_PER_SLICE] =
                    std::array::from_fn(|_| self.rng.random_range(data[0]..=data[1]));
                arrives.then_some(SliceRequest {
                    slice_id,
                    compute_demand,
                    data_size,
                    slot: self.slot,
                })
            })
            .collect()
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn num_slices(&self) -> usize {
        self.num_slices
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn ledger(&self) -> &ResourceLedger {
        &self.ledger
    }

    pub fn window(&self) -> &NormalizationWindow {
        &self.window
    }

    /// Requests awaiting a decision in the current slot.
    pub fn pending_requests(&self) -> &[Option<SliceRequest>] {
        &self.pending
    }

    pub fn step(&mut self, actions: &[Action]) -> Result<StepOutcome> {
        if actions.len() != self.num_slices {
            return Err(Error::DimensionMismatch {
                context: "step actions",
                expected: self.num_slices,
                found: actions.len(),
            });
        }
        let topology = &self.config.topology;
        let slot = self.slot;
        let mut statuses = vec![SliceStatus::Idle; self.num_slices];
        let mut served = Vec::new();

        // Feasibility in ascending slice order: earlier slices claim first.
        for (slice, action) in actions.iter().enumerate() {
            let Some(request) = &self.pending[slice] else {
                continue;
            };
            let path = &topology.slice_paths[slice];
            let mut grant = AllocationGrant::from_action(slice, action, topology, self.config.slice_cap_fraction, slot);
            let latency = match compute_latency(request, &grant, topology) {
                Ok(latency) => latency,
                Err(_) => {
                    statuses[slice] = SliceStatus::Failed(FailureReason::BelowMinimum);
                    continue;
                }
            };
            grant.occupancy_slots = self.config.occupancy.slots(latency.total, self.config.slot_length);
            if self.ledger.try_reserve(path, grant.clone()) {
                served.push((slice, latency, grant));
            } else {
                statuses[slice] = SliceStatus::Failed(FailureReason::Overdraw);
            }
        }

        // Utilization reflects every grant held after this slot's admissions.
        for (slice, latency, grant) in served {
            let path = &topology.slice_paths[slice];
            let utilization: [f64; MECS_PER_SLICE] = std::array::from_fn(|k| {
                let m = path.mecs[k];
                (self.ledger.allocated_compute(m) / topology.mec_capacity[m]).clamp(0.0, 1.0)
            });
            let energy = compute_energy(&latency.per_mec, &utilization, &self.config.power)?;
            self.window.insert(slot, latency.total, energy);
            statuses[slice] = SliceStatus::Served { latency, energy, grant };
        }

        let (c1, e1) = (self.window.min_latency(), self.window.min_energy());
        let mut rewards = vec![0.0; self.num_slices];
        let mut utilities = vec![0.0; self.num_slices];
        for (slice, status) in statuses.iter().enumerate() {
            match status {
                SliceStatus::Idle => {}
                SliceStatus::Served { latency, energy, .. } => {
                    let r = served_reward(latency.total, *energy, c1, e1, self.num_slices);
                    rewards[slice] = r;
                    utilities[slice] = r;
                }
                SliceStatus::Failed(_) => rewards[slice] = failure_reward(self.num_slices),
            }
        }

        self.slot += 1;
        self.ledger.tick();
        self.pending = self.draw_requests();

        Ok(StepOutcome {
            slot,
            shared_reward: rewards.iter().sum(),
            statuses,
            rewards,
            utilities,
            min_latency: c1,
            min_energy: e1,
        })
    }

    /// Critic state: `[remaining/J per MEC, remaining/B per link, request
    /// block per slice]`, padded with zeros up to `max_slices`.
    pub fn observe_global(&self) -> Vec<f64> {
        let topo = &self.config.topology;
        let mut obs = Vec::with_capacity(self.config.global_obs_dim());
        obs.extend((0..topo.num_mecs()).map(|m| self.ledger.remaining_compute(m) / topo.urllc_compute_cap));
        obs.extend((0..topo.num_links()).map(|l| self.ledger.remaining_bandwidth(l) / topo.urllc_bandwidth_cap));
        for slice in 0..self.config.max_slices {
            let block = self.pending.get(slice).map(|r| self.request_block(r.as_ref()));
            obs.extend_from_slice(&block.unwrap_or([0.0; ACTION_DIM]));
        }
        obs
    }

    fn request_block(&self, request: Option<&SliceRequest>) -> [f64; ACTION_DIM] {
        let mut block = [0.0; ACTION_DIM];
        if let Some(r) = request {
            let (cmax, dmax) = (self.config.demand.compute[1], self.config.demand.data[1]);
            for k in 0..MECS_PER_SLICE {
                block[k] = r.compute_demand[k] / cmax;
            }
            for k in 0..LINKS_PER_SLICE {
                block[MECS_PER_SLICE + k] = r.data_size[k] / dmax;
            }
        }
        block
    }

    /// Actor state: remaining resources on the slice's own MECs and links
    /// followed by its normalized request (zeros when it has none).
    pub fn observe_local(&self, slice: usize) -> Result<LocalObs> {
        if slice >= self.num_slices {
            return Err(Error::UnknownSlice(slice));
        }
        let topo = &self.config.topology;
        let path = &topo.slice_paths[slice];
        let mut obs = [0.0; LOCAL_OBS_DIM];
        for (k, &m) in path.mecs.iter().enumerate() {
            obs[k] = self.ledger.remaining_compute(m) / topo.urllc_compute_cap;
        }
        for (k, &l) in path.links.iter().enumerate() {
            obs[MECS_PER_SLICE + k] = self.ledger.remaining_bandwidth(l) / topo.urllc_bandwidth_cap;
        }
        obs[ACTION_DIM..].copy_from_slice(&self.request_block(self.pending[slice].as_ref()));
        Ok(obs)
    }

    pub fn observe_all_local(&self) -> Vec<LocalObs> {
        (0..self.num_slices)
            .map(|i| self.observe_local(i).expect("active slice"))
            .collect()
    }

    /// Replaces the pending requests; used to script exact scenarios.
    pub fn set_pending_requests(&mut self, requests: Vec<Option<SliceRequest>>) -> Result<()> {
        if requests.len() != self.num_slices {
            return Err(Error::DimensionMismatch {
                context: "pending requests",
                expected: self.num_slices,
                found: requests.len(),
            });
        }
        self.pending = requests;
        Ok(())
    }
}
