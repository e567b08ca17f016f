//! Fully connected tanh network `R³ → R` on ndarray batches.

use geonoise_core::rng::StreamRng;
use nalgebra::Vector3;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden_layers: usize,
    pub width: usize,
    pub input_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden_layers: 3,
            width: 64,
            input_dim: 3,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers == 0 || self.width == 0 || self.input_dim == 0 {
            return Err(HarnessError::InvalidConfig(format!(
                "model sizes must be positive, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// `a ↦ a·w + b`, with `w` stored as `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    fn zeros_like(&self) -> Self {
        Dense {
            w: Array2::zeros(self.w.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations kept from a forward pass for the backward pass.
pub struct Tape {
    acts: Vec<Array2<f64>>,
}

impl Tape {
    pub fn output(&self) -> Array1<f64> {
        self.acts.last().unwrap().column(0).to_owned()
    }
}

impl Mlp {
    /// Weights and biases uniform in `±1/√fan_in`.
    pub fn new(cfg: &ModelConfig, rng: &mut StreamRng) -> Result<Self> {
        cfg.validate()?;
        let mut dims = vec![cfg.input_dim];
        dims.extend(std::iter::repeat_n(cfg.width, cfg.hidden_layers));
        dims.push(1);
        let layers = dims
            .windows(2)
            .map(|d| {
                let bound = 1.0 / (d[0] as f64).sqrt();
                Dense {
                    w: Array2::from_shape_simple_fn((d[0], d[1]), || rng.random_range(-bound..bound)),
                    b: Array1::from_shape_simple_fn(d[1], || rng.random_range(-bound..bound)),
                }
            })
            .collect();
        Ok(Mlp { layers })
    }

    pub fn zeros_like(&self) -> Self {
        Mlp {
            layers: self.layers.iter().map(Dense::zeros_like).collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Batch forward pass, one input per row.
    pub fn forward_tape(&self, x: ArrayView2<f64>) -> Tape {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = acts[i].dot(&layer.w) + &layer.b;
            if i < last {
                z.mapv_inplace(f64::tanh);
            }
            acts.push(z);
        }
        Tape { acts }
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array1<f64> {
        self.forward_tape(x).output()
    }

    pub fn eval(&self, x: &Vector3<f64>) -> f64 {
        self.forward(as_batch(std::slice::from_ref(x)).view())[0]
    }

    /// Backpropagates `∂L/∂f` (one entry per row) through `tape`. Returns the
    /// parameter gradient and `∂L/∂x`.
    pub fn backward(&self, tape: &Tape, dout: &Array1<f64>) -> (Mlp, Array2<f64>) {
        let mut grads = self.zeros_like();
        let mut delta = dout.clone().insert_axis(Axis(1));
        for i in (0..self.layers.len()).rev() {
            let a = &tape.acts[i];
            grads.layers[i].w = a.t().dot(&delta);
            grads.layers[i].b = delta.sum_axis(Axis(0));
            let mut back = delta.dot(&self.layers[i].w.t());
            if i > 0 {
                // a = tanh(z) so tanh'(z) = 1 − a².
                back.zip_mut_with(a, |d, &h| *d *= 1.0 - h * h);
            }
            delta = back;
        }
        (grads, delta)
    }

    /// `∇ₓf` at one input.
    pub fn input_gradient(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let batch = as_batch(std::slice::from_ref(x));
        let tape = self.forward_tape(batch.view());
        let (_, dx) = self.backward(&tape, &Array1::ones(1));
        Vector3::new(dx[[0, 0]], dx[[0, 1]], dx[[0, 2]])
    }

    /// `dᵀ (∇²f) d` by forward-mode propagation of first and second
    /// directional derivatives.
    pub fn directional_second(&self, x: &Vector3<f64>, d: &Vector3<f64>) -> f64 {
        let mut a = Array1::from_iter(x.iter().copied());
        let mut da = Array1::from_iter(d.iter().copied());
        let mut dda = Array1::<f64>::zeros(3);
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let z = a.dot(&layer.w) + &layer.b;
            let dz = da.dot(&layer.w);
            let ddz = dda.dot(&layer.w);
            if i == last {
                return ddz[0];
            }
            let h = z.mapv(f64::tanh);
            let s = h.mapv(|h| 1.0 - h * h);
            da = &s * &dz;
            dda = &s * &ddz - 2.0 * &h * &s * &dz * &dz;
            a = h;
        }
        unreachable!("network has an output layer")
    }

    /// `Δf = tr ∇²f`.
    pub fn laplacian(&self, x: &Vector3<f64>) -> f64 {
        (0..3)
            .map(|k| {
                let mut e = Vector3::zeros();
                e[k] = 1.0;
                self.directional_second(x, &e)
            })
            .sum()
    }
}

/// Rows of an `n × 3` batch.
pub fn as_batch(points: &[Vector3<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((points.len(), 3), |(i, k)| points[i][k])
}
