//! Closed-form latency, rate, power and reward models for one slice in one slot.

use serde::{Deserialize, Serialize};

use super::topology::{Topology, ACTION_DIM, LINKS_PER_SLICE, MECS_PER_SLICE};
use crate::error::{Error, Result};

/// Resource amounts are tracked in integer nano-units (nano-GHz, nano-Gbps) so
/// that the ledger conserves capacity exactly.
pub const UNITS_PER_WHOLE: f64 = 1e9;

/// Allocations below this fraction of the reserved capacity count as no allocation.
pub const MIN_ALLOCATION_FRACTION: f64 = 1e-6;

pub fn to_units(amount: f64) -> i64 {
    (amount * UNITS_PER_WHOLE).floor() as i64
}

pub fn from_units(units: i64) -> f64 {
    units as f64 / UNITS_PER_WHOLE
}

/// One slot's demand of one slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRequest {
    pub slice_id: usize,
    /// Gcycles per used MEC.
    pub compute_demand: [f64; MECS_PER_SLICE],
    /// Gb per used link.
    pub data_size: [f64; LINKS_PER_SLICE],
    pub slot: u64,
}

/// Resources granted to one slice, quantized to ledger units.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationGrant {
    pub slice_id: usize,
    /// GHz per used MEC.
    pub compute_alloc: [f64; MECS_PER_SLICE],
    /// Gbps per used link.
    pub bandwidth_alloc: [f64; LINKS_PER_SLICE],
    pub compute_units: [i64; MECS_PER_SLICE],
    pub bandwidth_units: [i64; LINKS_PER_SLICE],
    pub occupancy_slots: u32,
    pub slot_created: u64,
}

impl AllocationGrant {
    pub fn new(slice_id: usize, compute: [f64; MECS_PER_SLICE], bandwidth: [f64; LINKS_PER_SLICE], slot: u64) -> Self {
        let compute_units = compute.map(|x| to_units(x.max(0.0)));
        let bandwidth_units = bandwidth.map(|x| to_units(x.max(0.0)));
        AllocationGrant {
            slice_id,
            compute_alloc: compute_units.map(from_units),
            bandwidth_alloc: bandwidth_units.map(from_units),
            compute_units,
            bandwidth_units,
            occupancy_slots: 1,
            slot_created: slot,
        }
    }

    /// Scales a `[0,1]^5` action by the per-slice caps `cap_fraction * J` and
    /// `cap_fraction * B`. Components are clipped to `[0,1]` first.
    pub fn from_action(
        slice_id: usize,
        action: &[f64; ACTION_DIM],
        topology: &Topology,
        cap_fraction: f64,
        slot: u64,
    ) -> Self {
        let share = |x: f64| if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
        let compute_cap = cap_fraction * topology.urllc_compute_cap;
        let bandwidth_cap = cap_fraction * topology.urllc_bandwidth_cap;
        let compute = std::array::from_fn(|k| share(action[k]) * compute_cap);
        let bandwidth = std::array::from_fn(|k| share(action[MECS_PER_SLICE + k]) * bandwidth_cap);
        Self::new(slice_id, compute, bandwidth, slot)
    }

    /// True when some used MEC or link gets less than the minimum allocation.
    pub fn below_minimum(&self, topology: &Topology) -> bool {
        let compute_min = MIN_ALLOCATION_FRACTION * topology.urllc_compute_cap;
        let bandwidth_min = MIN_ALLOCATION_FRACTION * topology.urllc_bandwidth_cap;
        self.compute_alloc.iter().any(|&e| e < compute_min) || self.bandwidth_alloc.iter().any(|&b| b < bandwidth_min)
    }
}

/// Achievable rate of a link share: `bandwidth * log2(1 + snr)`.
pub fn compute_data_rate(bandwidth: f64, snr: f64) -> f64 {
    bandwidth * (1.0 + snr).log2()
}

/// Latency decomposition of one served request, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Latency {
    /// Transmission plus the slowest server.
    pub total: f64,
    pub compute: f64,
    pub transmission: f64,
    pub per_mec: [f64; MECS_PER_SLICE],
}

/// Computing time is the slowest of the three parallel VNFs; transmission
/// time sums over the two links.
pub fn compute_latency(request: &SliceRequest, grant: &AllocationGrant, topology: &Topology) -> Result<Latency> {
    if grant.below_minimum(topology) {
        return Err(Error::Unservable);
    }
    let per_mec: [f64; MECS_PER_SLICE] = std::array::from_fn(|k| request.compute_demand[k] / grant.compute_alloc[k]);
    let compute = per_mec.iter().copied().fold(0.0, f64::max);
    let transmission = request
        .data_size
        .iter()
        .zip(&grant.bandwidth_alloc)
        .map(|(&d, &b)| d / compute_data_rate(b, topology.snr))
        .sum::<f64>();
    Ok(Latency {
        total: transmission + compute,
        compute,
        transmission,
        per_mec,
    })
}

/// Affine server power curve `p_static + p_dynamic * utilization`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub p_static: f64,
    pub p_dynamic: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            p_static: 0.6,
            p_dynamic: 0.4,
        }
    }
}

impl PowerModel {
    pub fn power_draw(&self, utilization: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&utilization) {
            return Err(Error::Domain(format!("utilization {utilization} outside [0, 1]")));
        }
        Ok(self.p_static + self.p_dynamic * utilization)
    }
}

/// Energy of one slice: power at each used server's utilization times the
/// time the slice keeps that server busy.
pub fn compute_energy(per_mec_latency: &[f64], utilization: &[f64], power: &PowerModel) -> Result<f64> {
    if per_mec_latency.len() != utilization.len() {
        return Err(Error::DimensionMismatch {
            context: "compute_energy",
            expected: per_mec_latency.len(),
            found: utilization.len(),
        });
    }
    per_mec_latency
        .iter()
        .zip(utilization)
        .try_fold(0.0, |acc, (&c, &u)| Ok(acc + power.power_draw(u)? * c))
}

fn ratio(best: f64, value: f64) -> f64 {
    if value > 0.0 {
        best / value
    } else {
        1.0
    }
}

/// Normalized objective of a served slice, `(C1/C + E1/E) / (2I)`.
pub fn served_reward(latency: f64, energy: f64, min_latency: f64, min_energy: f64, num_slices: usize) -> f64 {
    (ratio(min_latency, latency) + ratio(min_energy, energy)) / (2.0 * num_slices as f64)
}

/// Penalty for a slice whose request could not be served.
pub fn failure_reward(num_slices: usize) -> f64 {
    -1.0 / num_slices as f64
}
