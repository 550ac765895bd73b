use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `y`.
    fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected network. `sizes` holds the input width followed by every
/// layer's output width; layer `k` maps `sizes[k] -> sizes[k+1]` and applies
/// `activations[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
    params: Vec<f64>,
}

/// Intermediate values of a batched forward pass, consumed by `backward`.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// `outputs[0]` is the input batch, `outputs[k+1]` the output of layer `k`.
    outputs: Vec<Array2<f64>>,
    pre_activations: Vec<Array2<f64>>,
}

#[derive(Clone, Debug)]
pub struct Gradients {
    /// Same layout as [`Mlp::params`], summed over the batch.
    pub params: Vec<f64>,
    /// One row per batch sample.
    pub input: Array2<f64>,
}

impl Mlp {
    /// A network with all parameters zero.
    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Result<Self> {
        if sizes.len() < 2 || activations.len() != sizes.len() - 1 || sizes.contains(&0) {
            return Err(Error::ShapeMismatch(format!(
                "{} sizes and {} activations do not describe a network",
                sizes.len(),
                activations.len()
            )));
        }
        let count = sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum();
        Ok(Mlp {
            sizes: sizes.to_vec(),
            activations: activations.to_vec(),
            params: vec![0.0; count],
        })
    }

    /// Weights and biases uniform in `±1/sqrt(fan_in)` per layer.
    pub fn init_uniform<R: Rng + ?Sized>(sizes: &[usize], activations: &[Activation], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes, activations)?;
        let mut offset = 0;
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for p in &mut net.params[offset..offset + (w[0] + 1) * w[1]] {
                *p = rng.random_range(-bound..=bound);
            }
            offset += (w[0] + 1) * w[1];
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn num_layers(&self) -> usize {
        self.activations.len()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                context: "set_params",
                expected: self.params.len(),
                found: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// True when both networks have the same layer sizes and activations.
    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.sizes == other.sizes && self.activations == other.activations
    }

    /// Start of layer `k`'s weights in the flat vector.
    fn layer_offset(&self, layer: usize) -> usize {
        self.sizes[..layer + 1].windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    fn layer_views(&self, layer: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        let (inputs, outputs) = (self.sizes[layer], self.sizes[layer + 1]);
        let start = self.layer_offset(layer);
        let weights = &self.params[start..start + inputs * outputs];
        let bias = &self.params[start + inputs * outputs..start + (inputs + 1) * outputs];
        (
            ArrayView2::from_shape((outputs, inputs), weights).expect("layer layout"),
            ArrayView1::from(bias),
        )
    }

    /// Batched forward pass; `input` has one sample per row.
    pub fn forward(&self, input: ArrayView2<'_, f64>) -> Result<(Array2<f64>, ForwardCache)> {
        if input.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "forward input",
                expected: self.input_dim(),
                found: input.ncols(),
            });
        }
        let mut outputs = Vec::with_capacity(self.num_layers() + 1);
        let mut pre_activations = Vec::with_capacity(self.num_layers());
        outputs.push(input.to_owned());
        for (layer, &act) in self.activations.iter().enumerate() {
            let (w, b) = self.layer_views(layer);
            let mut z = outputs[layer].dot(&w.t());
            z += &b;
            let y = z.mapv(|v| act.apply(v));
            pre_activations.push(z);
            outputs.push(y);
        }
        let out = outputs.last().expect("output layer").clone();
        Ok((
            out,
            ForwardCache {
                outputs,
                pre_activations,
            },
        ))
    }

    /// Forward pass without keeping intermediates.
    pub fn predict_batch(&self, input: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if input.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "forward input",
                expected: self.input_dim(),
                found: input.ncols(),
            });
        }
        let mut x = input.to_owned();
        for (layer, &act) in self.activations.iter().enumerate() {
            let (w, b) = self.layer_views(layer);
            let mut z = x.dot(&w.t());
            z += &b;
            z.mapv_inplace(|v| act.apply(v));
            x = z;
        }
        Ok(x)
    }

    /// Single-sample forward pass.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        Ok(self.predict_batch(view)?.iter().copied().collect())
    }

    /// Reverse pass for the scalar `sum(output * output_grad)`: returns its
    /// gradient with respect to the parameters (summed over the batch) and to
    /// every input row.
    pub fn backward(&self, cache: &ForwardCache, output_grad: ArrayView2<'_, f64>) -> Result<Gradients> {
        let out = cache.outputs.last().expect("cache holds the output");
        if cache.outputs.len() != self.num_layers() + 1 || cache.outputs[0].ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch(
                "forward cache does not belong to this network".into(),
            ));
        }
        if output_grad.dim() != out.dim() {
            return Err(Error::DimensionMismatch {
                context: "backward output gradient",
                expected: out.len(),
                found: output_grad.len(),
            });
        }
        let mut param_grad = vec![0.0; self.params.len()];
        let mut grad = output_grad.to_owned();
        for layer in (0..self.num_layers()).rev() {
            let act = self.activations[layer];
            let z = &cache.pre_activations[layer];
            let y = &cache.outputs[layer + 1];
            ndarray::Zip::from(&mut grad)
                .and(z)
                .and(y)
                .for_each(|g, &z, &y| *g *= act.derivative(z, y));
            let (inputs, outputs) = (self.sizes[layer], self.sizes[layer + 1]);
            let start = self.layer_offset(layer);
            let dw = grad.t().dot(&cache.outputs[layer]);
            let db = grad.sum_axis(Axis(0));
            // logical (row-major) order, whatever the memory layout of `dw`
            for (dst, src) in param_grad[start..start + inputs * outputs].iter_mut().zip(dw.iter()) {
                *dst = *src;
            }
            for (dst, src) in param_grad[start + inputs * outputs..start + (inputs + 1) * outputs]
                .iter_mut()
                .zip(db.iter())
            {
                *dst = *src;
            }
            let (w, _) = self.layer_views(layer);
            grad = grad.dot(&w);
        }
        Ok(Gradients {
            params: param_grad,
            input: grad,
        })
    }
}
