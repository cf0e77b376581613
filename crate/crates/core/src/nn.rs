//! Parameterized building blocks shared by the MPNN and the fingerprint MLP.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Activation, AutodiffError, Bound, GruVars, ParamId, ParamStore, Tape, Tensor, Var};

/// Glorot-uniform matrix scaled by `gain`.
pub fn glorot(rng: &mut impl Rng, fan_in: usize, fan_out: usize, gain: f64) -> Tensor {
    let limit = gain * (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out).map(|_| rng.gen_range(-limit..limit)).collect();
    Tensor::new(fan_in, fan_out, data).expect("glorot shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
}

impl Linear {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        fan_in: usize,
        fan_out: usize,
        gain: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let weight = store.add(format!("{name}.weight"), glorot(rng, fan_in, fan_out, gain));
        let bias = store.add(format!("{name}.bias"), Tensor::zeros(1, fan_out));
        Self { weight, bias }
    }

    pub fn forward(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        x: Var,
        activation: Activation,
    ) -> Result<Var, AutodiffError> {
        tape.dense(x, bound[self.weight], bound[self.bias], activation)
    }
}

/// Stack of dense layers: ReLU between layers, linear output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedForward {
    layers: Vec<Linear>,
}

impl FeedForward {
    /// `widths` lists input, hidden and output widths. `output_gain` scales
    /// the initial weights of the last layer.
    pub fn new(store: &mut ParamStore, name: &str, widths: &[usize], output_gain: f64, rng: &mut impl Rng) -> Self {
        assert!(widths.len() >= 2, "a feed-forward net needs input and output widths");
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let gain = if i == last { output_gain } else { 1.0 };
                Linear::new(store, &format!("{name}.{i}"), w[0], w[1], gain, rng)
            })
            .collect();
        Self { layers }
    }

    pub fn layers(&self) -> &[Linear] {
        &self.layers
    }

    pub fn forward(&self, tape: &mut Tape, bound: &Bound, x: Var) -> Result<Var, AutodiffError> {
        let last = self.layers.len() - 1;
        let mut h = x;
        for (i, layer) in self.layers.iter().enumerate() {
            let act = if i == last { Activation::None } else { Activation::Relu };
            h = layer.forward(tape, bound, h, act)?;
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gru {
    w_z: ParamId,
    u_z: ParamId,
    b_z: ParamId,
    w_r: ParamId,
    u_r: ParamId,
    b_r: ParamId,
    w_h: ParamId,
    u_h: ParamId,
    b_h: ParamId,
}

impl Gru {
    pub fn new(store: &mut ParamStore, name: &str, d: usize, rng: &mut impl Rng) -> Self {
        let mut mat = |gate: &str, kind: &str| store.add(format!("{name}.{kind}_{gate}"), glorot(rng, d, d, 1.0));
        let (w_z, u_z) = (mat("z", "w"), mat("z", "u"));
        let (w_r, u_r) = (mat("r", "w"), mat("r", "u"));
        let (w_h, u_h) = (mat("h", "w"), mat("h", "u"));
        let b_z = store.add(format!("{name}.b_z"), Tensor::zeros(1, d));
        let b_r = store.add(format!("{name}.b_r"), Tensor::zeros(1, d));
        let b_h = store.add(format!("{name}.b_h"), Tensor::zeros(1, d));
        Self {
            w_z,
            u_z,
            b_z,
            w_r,
            u_r,
            b_r,
            w_h,
            u_h,
            b_h,
        }
    }

    pub fn bind(&self, bound: &Bound) -> GruVars {
        GruVars {
            w_z: bound[self.w_z],
            u_z: bound[self.u_z],
            b_z: bound[self.b_z],
            w_r: bound[self.w_r],
            u_r: bound[self.u_r],
            b_r: bound[self.b_r],
            w_h: bound[self.w_h],
            u_h: bound[self.u_h],
            b_h: bound[self.b_h],
        }
    }

    /// Parameter ids in the order `w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h`.
    pub fn ids(&self) -> [ParamId; 9] {
        [
            self.w_z, self.u_z, self.b_z, self.w_r, self.u_r, self.b_r, self.w_h, self.u_h, self.b_h,
        ]
    }
}
