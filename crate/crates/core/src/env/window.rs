use std::collections::VecDeque;

/// Sliding record of served latencies and energies over the last
/// `span_slots` slots, pooled across slices. Its minima normalize rewards.
#[derive(Clone, Debug)]
pub struct NormalizationWindow {
    span_slots: u64,
    // (slot, latency, energy)
    samples: VecDeque<(u64, f64, f64)>,
    min_latency: f64,
    min_energy: f64,
}

pub const DEFAULT_WINDOW_SLOTS: u64 = 500;

impl NormalizationWindow {
    pub fn new(span_slots: u64) -> Self {
        NormalizationWindow {
            span_slots: span_slots.max(1),
            samples: VecDeque::new(),
            min_latency: f64::INFINITY,
            min_energy: f64::INFINITY,
        }
    }

    /// Records one served slice and evicts samples older than the span.
    pub fn insert(&mut self, slot: u64, latency: f64, energy: f64) {
        let mut evicted = false;
        while let Some(&(oldest, _, _)) = self.samples.front() {
            if oldest + self.span_slots <= slot {
                self.samples.pop_front();
                evicted = true;
            } else {
                break;
            }
        }
        self.samples.push_back((slot, latency, energy));
        if evicted {
            self.recompute();
        } else {
            self.min_latency = self.min_latency.min(latency);
            self.min_energy = self.min_energy.min(energy);
        }
    }

    fn recompute(&mut self) {
        let (c, e) = self
            .samples
            .iter()
            .fold((f64::INFINITY, f64::INFINITY), |(c, e), &(_, l, en)| {
                (c.min(l), e.min(en))
            });
        self.min_latency = c;
        self.min_energy = e;
    }

    /// Minimum latency in the window (C1); infinite while empty.
    pub fn min_latency(&self) -> f64 {
        self.min_latency
    }

    /// Minimum energy in the window (E1); infinite while empty.
    pub fn min_energy(&self) -> f64 {
        self.min_energy
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Oldest and newest slot currently held.
    pub fn slot_range(&self) -> Option<(u64, u64)> {
        Some((self.samples.front()?.0, self.samples.back()?.0))
    }

    pub fn span_slots(&self) -> u64 {
        self.span_slots
    }

    pub fn latencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.2)
    }
}
