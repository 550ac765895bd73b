use std::io::Write;

use super::{SliceStatus, StepOutcome};
use crate::error::Result;

/// Streams one CSV row per slot: `slot`, then for each slice
/// `served_i,latency_i,energy_i,reward_i`, then `utility`. Latency and energy
/// are empty for slices that were not served.
pub struct SlotTraceWriter<W: Write> {
    inner: csv::Writer<W>,
    num_slices: usize,
}

impl<W: Write> SlotTraceWriter<W> {
    pub fn new(sink: W, num_slices: usize) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(sink);
        let mut header = vec!["slot".to_string()];
        for i in 0..num_slices {
            header.extend(["served", "latency", "energy", "reward"].map(|c| format!("{c}_{i}")));
        }
        header.push("utility".into());
        inner.write_record(&header)?;
        Ok(SlotTraceWriter { inner, num_slices })
    }

    pub fn write(&mut self, outcome: &StepOutcome) -> Result<()> {
        let mut row = Vec::with_capacity(2 + 4 * self.num_slices);
        row.push(outcome.slot.to_string());
        for (status, reward) in outcome.statuses.iter().zip(&outcome.rewards) {
            match status {
                SliceStatus::Served { latency, energy, .. } => {
                    row.extend(["1".into(), latency.total.to_string(), energy.to_string()])
                }
                _ => row.extend(["0".into(), String::new(), String::new()]),
            }
            row.push(reward.to_string());
        }
        row.push(super::eval_utility(outcome).to_string());
        self.inner.write_record(&row)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
    }
}
