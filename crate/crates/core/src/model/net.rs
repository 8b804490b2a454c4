//! Dense feed-forward networks with hand-written backpropagation.
//!
//! All tensors are batch-major: a batch of `B` inputs of width `d` is a
//! `B × d` matrix. Hidden layers use ReLU; the last layer applies the
//! network's output activation.

use ndarray::{Array1, Array2, Axis};

use super::Activation;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `y = x · Wᵀ + b` with `W` stored as `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Dense {
            weights: Array2::zeros((n_out, n_in)),
            bias: Array1::zeros(n_out),
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot(n_in: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        let weights = Array2::from_shape_simple_fn((n_out, n_in), || rng.random_range(-limit..limit));
        Dense {
            weights,
            bias: Array1::zeros(n_out),
        }
    }

    pub fn n_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.weights.nrows()
    }

    fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut y = x.dot(&self.weights.t());
        y += &self.bias;
        y
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(self.bias.iter()).all(|v| v.is_finite())
    }
}

/// Chain of dense layers: ReLU after every layer but the last, `output`
/// after the last.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub output: Activation,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    inputs: Vec<Array2<f64>>,
    preacts: Vec<Array2<f64>>,
}

impl MlpCache {
    pub fn preactivations(&self) -> &[Array2<f64>] {
        &self.preacts
    }
}

/// Gradients shaped like an [`Mlp`]'s parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub layers: Vec<Dense>,
}

impl MlpGrads {
    pub fn zeros_like(net: &Mlp) -> Self {
        MlpGrads {
            layers: net.layers.iter().map(|l| Dense::zeros(l.n_in(), l.n_out())).collect(),
        }
    }

    pub fn iter_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
    }
}

impl Mlp {
    /// Layer widths `dims[0] → dims[1] → … → dims[last]`.
    pub fn glorot(dims: &[usize], output: Activation, rng: &mut ChaCha8Rng) -> Self {
        Mlp {
            layers: dims.windows(2).map(|d| Dense::glorot(d[0], d[1], rng)).collect(),
            output,
        }
    }

    pub fn zeros(dims: &[usize], output: Activation) -> Self {
        Mlp {
            layers: dims.windows(2).map(|d| Dense::zeros(d[0], d[1])).collect(),
            output,
        }
    }

    fn activation(&self, i: usize) -> Activation {
        if i + 1 < self.layers.len() {
            Activation::Relu
        } else {
            self.output
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, Dense::n_in)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, Dense::n_out)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(Dense::is_finite)
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.forward(&h);
            let act = self.activation(i);
            h.mapv_inplace(|v| act.apply(v));
        }
        h
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, MlpCache) {
        let mut cache = MlpCache {
            inputs: Vec::with_capacity(self.layers.len()),
            preacts: Vec::with_capacity(self.layers.len()),
        };
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&h);
            cache.inputs.push(h);
            let act = self.activation(i);
            h = z.mapv(|v| act.apply(v));
            cache.preacts.push(z);
        }
        (h, cache)
    }

    /// Back-propagates `grad_out` (∂L/∂output) and returns ∂L/∂input.
    /// Parameter gradients are added into `acc` when given.
    pub fn backward(&self, cache: &MlpCache, grad_out: Array2<f64>, mut acc: Option<&mut MlpGrads>) -> Array2<f64> {
        let mut g = grad_out;
        for i in (0..self.layers.len()).rev() {
            let act = self.activation(i);
            if act != Activation::Linear {
                ndarray::Zip::from(&mut g)
                    .and(&cache.preacts[i])
                    .for_each(|gv, &z| *gv *= act.derivative(z));
            }
            if let Some(acc) = acc.as_deref_mut() {
                let dst = &mut acc.layers[i];
                dst.weights += &g.t().dot(&cache.inputs[i]);
                dst.bias += &g.sum_axis(Axis(0));
            }
            g = g.dot(&self.layers[i].weights);
        }
        g
    }
}
