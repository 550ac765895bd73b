use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Mlp};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "edgeslice.mlp";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Versioned JSON form of an [`Mlp`]. Floats are written in shortest
/// round-trip form and parsed back exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpCheckpoint {
    pub format: String,
    pub version: u32,
    pub layers: Vec<LayerRecord>,
}

impl From<&Mlp> for MlpCheckpoint {
    fn from(net: &Mlp) -> Self {
        let mut offset = 0;
        let layers = net
            .sizes()
            .windows(2)
            .zip(net.activations())
            .map(|(w, &activation)| {
                let (inputs, outputs) = (w[0], w[1]);
                let weights = net.params()[offset..offset + inputs * outputs].to_vec();
                let bias = net.params()[offset + inputs * outputs..offset + (inputs + 1) * outputs].to_vec();
                offset += (inputs + 1) * outputs;
                LayerRecord {
                    inputs,
                    outputs,
                    activation,
                    weights,
                    bias,
                }
            })
            .collect();
        MlpCheckpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            layers,
        }
    }
}

impl MlpCheckpoint {
    pub fn to_mlp(&self) -> Result<Mlp> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointMismatch(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        let first = self
            .layers
            .first()
            .ok_or_else(|| Error::ShapeMismatch("checkpoint has no layers".into()))?;
        let mut sizes = vec![first.inputs];
        let mut params = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.inputs != *sizes.last().expect("non-empty")
                || layer.weights.len() != layer.inputs * layer.outputs
                || layer.bias.len() != layer.outputs
            {
                return Err(Error::ShapeMismatch(format!("checkpoint layer {k} is inconsistent")));
            }
            sizes.push(layer.outputs);
            params.extend_from_slice(&layer.weights);
            params.extend_from_slice(&layer.bias);
        }
        let activations: Vec<_> = self.layers.iter().map(|l| l.activation).collect();
        let mut net = Mlp::zeros(&sizes, &activations)?;
        net.set_params(&params)?;
        Ok(net)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
