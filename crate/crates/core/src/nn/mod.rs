//! Dense networks with exact reverse-mode gradients, Adam, and JSON checkpoints.
//!
//! Parameters live in one flat vector (per layer: row-major weights, then
//! biases) so soft updates and parameter averaging are plain vector algebra.

mod adam;
mod checkpoint;
mod mlp;

pub use adam::{Adam, AdamConfig, Direction};
pub use checkpoint::{MlpCheckpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use mlp::{Activation, ForwardCache, Gradients, Mlp};
