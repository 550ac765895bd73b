use super::model::{from_units, to_units, AllocationGrant};
use super::topology::{SlicePath, Topology};

#[derive(Clone, Debug, PartialEq)]
pub struct ActiveGrant {
    pub grant: AllocationGrant,
    pub path: SlicePath,
    /// Slots left before the resources are released, counting the current one.
    pub slots_left: u32,
}

/// Remaining reserved capacity per MEC and link, kept in integer units.
///
/// `remaining + sum(active grants) == reserved capacity` holds exactly at all
/// times; every mutation goes through [`ResourceLedger::try_reserve`] or
/// [`ResourceLedger::tick`].
#[derive(Clone, Debug)]
pub struct ResourceLedger {
    compute_cap: i64,
    bandwidth_cap: i64,
    remaining_compute: Vec<i64>,
    remaining_bandwidth: Vec<i64>,
    active: Vec<ActiveGrant>,
}

impl ResourceLedger {
    pub fn new(topology: &Topology) -> Self {
        let compute_cap = to_units(topology.urllc_compute_cap);
        let bandwidth_cap = to_units(topology.urllc_bandwidth_cap);
        ResourceLedger {
            compute_cap,
            bandwidth_cap,
            remaining_compute: vec![compute_cap; topology.num_mecs()],
            remaining_bandwidth: vec![bandwidth_cap; topology.num_links()],
            active: Vec::new(),
        }
    }

    pub fn fits(&self, path: &SlicePath, grant: &AllocationGrant) -> bool {
        path.mecs
            .iter()
            .zip(&grant.compute_units)
            .all(|(&m, &e)| e <= self.remaining_compute[m])
            && path
                .links
                .iter()
                .zip(&grant.bandwidth_units)
                .all(|(&l, &b)| b <= self.remaining_bandwidth[l])
    }

    /// Claims the grant's resources for `grant.occupancy_slots` slots. Returns
    /// false and leaves the ledger untouched when any MEC or link would overdraw.
    pub fn try_reserve(&mut self, path: &SlicePath, grant: AllocationGrant) -> bool {
        if !self.fits(path, &grant) {
            return false;
        }
        for (&m, &e) in path.mecs.iter().zip(&grant.compute_units) {
            self.remaining_compute[m] -= e;
        }
        for (&l, &b) in path.links.iter().zip(&grant.bandwidth_units) {
            self.remaining_bandwidth[l] -= b;
        }
        self.active.push(ActiveGrant {
            slots_left: grant.occupancy_slots.max(1),
            path: path.clone(),
            grant,
        });
        true
    }

    /// Advances one slot: counts every grant down and returns expired ones to
    /// the pool. Returns the released grants in reservation order.
    pub fn tick(&mut self) -> Vec<AllocationGrant> {
        let mut released = Vec::new();
        let mut kept = Vec::with_capacity(self.active.len());
        for mut active in self.active.drain(..) {
            active.slots_left -= 1;
            if active.slots_left == 0 {
                for (&m, &e) in active.path.mecs.iter().zip(&active.grant.compute_units) {
                    self.remaining_compute[m] += e;
                }
                for (&l, &b) in active.path.links.iter().zip(&active.grant.bandwidth_units) {
                    self.remaining_bandwidth[l] += b;
                }
                released.push(active.grant);
            } else {
                kept.push(active);
            }
        }
        self.active = kept;
        released
    }

    pub fn remaining_compute(&self, mec: usize) -> f64 {
        from_units(self.remaining_compute[mec])
    }

    pub fn remaining_bandwidth(&self, link: usize) -> f64 {
        from_units(self.remaining_bandwidth[link])
    }

    pub fn remaining_compute_units(&self) -> &[i64] {
        &self.remaining_compute
    }

    pub fn remaining_bandwidth_units(&self) -> &[i64] {
        &self.remaining_bandwidth
    }

    /// GHz currently held on `mec` by all active grants.
    pub fn allocated_compute(&self, mec: usize) -> f64 {
        from_units(self.compute_cap - self.remaining_compute[mec])
    }

    pub fn active_grants(&self) -> &[ActiveGrant] {
        &self.active
    }

    pub fn compute_cap_units(&self) -> i64 {
        self.compute_cap
    }

    pub fn bandwidth_cap_units(&self) -> i64 {
        self.bandwidth_cap
    }

    /// Recomputes every resource from the active grants and checks it against
    /// the running balance and the capacity bounds.
    pub fn is_consistent(&self) -> bool {
        let mut compute = vec![0i64; self.remaining_compute.len()];
        let mut bandwidth = vec![0i64; self.remaining_bandwidth.len()];
        for active in &self.active {
            for (&m, &e) in active.path.mecs.iter().zip(&active.grant.compute_units) {
                compute[m] += e;
            }
            for (&l, &b) in active.path.links.iter().zip(&active.grant.bandwidth_units) {
                bandwidth[l] += b;
            }
        }
        let balanced = |held: &[i64], remaining: &[i64], cap: i64| {
            held.iter()
                .zip(remaining)
                .all(|(&h, &r)| h + r == cap && (0..=cap).contains(&r))
        };
        balanced(&compute, &self.remaining_compute, self.compute_cap)
            && balanced(&bandwidth, &self.remaining_bandwidth, self.bandwidth_cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserve_and_release_restore_capacity() {
        let topo = Topology::ring(4);
        let mut ledger = ResourceLedger::new(&topo);
        let mut grant = AllocationGrant::new(0, [33.3, 12.5, 40.0], [1.1, 3.7], 0);
        grant.occupancy_slots = 2;
        assert!(ledger.try_reserve(&topo.slice_paths[0], grant));
        assert!(ledger.is_consistent());
        assert!(ledger.remaining_compute(0) < 100.0);
        assert!(ledger.tick().is_empty());
        assert_eq!(ledger.tick().len(), 1);
        assert!(ledger.active_grants().is_empty());
        for m in 0..topo.num_mecs() {
            assert_eq!(ledger.remaining_compute(m), 100.0);
        }
        for l in 0..topo.num_links() {
            assert_eq!(ledger.remaining_bandwidth(l), 10.0);
        }
    }

    #[test]
    fn overdraw_is_rejected_without_side_effects() {
        let topo = Topology::ring(4);
        let mut ledger = ResourceLedger::new(&topo);
        // Slices 0, 1 and 2 all run on MEC 2.
        for slice in 0..2 {
            let g = AllocationGrant::new(slice, [40.0; 3], [4.0; 2], 0);
            assert!(ledger.try_reserve(&topo.slice_paths[slice], g));
        }
        let before = ledger.remaining_compute_units().to_vec();
        let g = AllocationGrant::new(2, [40.0; 3], [4.0; 2], 0);
        assert!(!ledger.try_reserve(&topo.slice_paths[2], g));
        assert_eq!(ledger.remaining_compute_units(), &before[..]);
        assert_eq!(ledger.remaining_compute(2), 20.0);
        assert!(ledger.is_consistent());
    }
}
