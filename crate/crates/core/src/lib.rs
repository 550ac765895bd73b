//! Edge network slicing: a discrete-time MEC slicing simulator, a multi-agent
//! DDPG learning engine with one actor-critic pair per slice, and
//! parameter-averaging transitions for changing the number of slices at runtime.
//!
//! The crate is organized bottom-up:
//!
//! - [`env`]: topology, request generation, the resource ledger, latency and
//!   energy models and the per-slot stepping loop.
//! - [`nn`]: dense networks with analytic gradients, Adam and JSON checkpoints.
//! - [`maddpg`]: agents, exploration noise, replay and the three-stage schedule.
//! - [`incremental`]: generalized models and grow/shrink transitions.
//! - [`baselines`]: random, over-allocation and static-slicing policies.
//! - [`harness`]: experiment configs, training/evaluation campaigns and reports.

pub mod baselines;
pub mod env;
pub mod error;
pub mod harness;
pub mod incremental;
pub mod maddpg;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};
