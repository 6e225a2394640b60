//! From-scratch LSTM binary classifier: forward pass, exact backpropagation
//! through time, Adam, the training loop and model serialization.
//!
//! The network is `input -> LSTM(H) -> dense -> softmax` over two classes
//! ("is the goal" / "is not"). One shared parameter set scores every goal's
//! feature sequence; the per-goal fan-out lives in [`crate::ensemble`].
//! All arithmetic is f64 and fully deterministic given a seed.

mod adam;
mod io;
mod train;

pub use adam::{adam_update, AdamState};
pub use io::{load_model, save_model, ModelFile, MODEL_MAGIC, MODEL_VERSION};
pub use train::{
    classification_accuracy, train, training_examples, NegativeSampling, SequenceMode, TrainConfig,
    TrainExample, TrainOutcome,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Two output classes: not-the-goal (0) and the-goal (1).
pub const OUTPUT_CLASSES: usize = 2;

/// Network shape. The default hidden size is 20; the no-gaze variant uses 40.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_size: usize,
    pub hidden_units: usize,
}

pub const DEFAULT_HIDDEN_UNITS: usize = 20;
pub const NO_GAZE_HIDDEN_UNITS: usize = 40;

impl NetworkConfig {
    pub fn new(input_size: usize, hidden_units: usize) -> Result<NetworkConfig> {
        if input_size == 0 || hidden_units == 0 {
            return Err(Error::Config(format!(
                "network needs input_size >= 1 and hidden_units >= 1, got {input_size}/{hidden_units}"
            )));
        }
        Ok(NetworkConfig {
            input_size,
            hidden_units,
        })
    }
}

/// All learnable weights. Gate rows are ordered (input, forget, cell
/// candidate, output); `w_x` is 4H x F, `w_h` is 4H x H, both row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub input_size: usize,
    pub hidden_units: usize,
    pub w_x: Vec<f64>,
    pub w_h: Vec<f64>,
    pub b: Vec<f64>,
    /// Dense layer, 2 x H row-major.
    pub dense_w: Vec<f64>,
    pub dense_b: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(cfg: &NetworkConfig) -> LstmParams {
        let (f, h) = (cfg.input_size, cfg.hidden_units);
        LstmParams {
            input_size: f,
            hidden_units: h,
            w_x: vec![0.0; 4 * h * f],
            w_h: vec![0.0; 4 * h * h],
            b: vec![0.0; 4 * h],
            dense_w: vec![0.0; OUTPUT_CLASSES * h],
            dense_b: vec![0.0; OUTPUT_CLASSES],
        }
    }

    /// Seeded init: weights uniform in [-1/sqrt(H), 1/sqrt(H)], biases zero
    /// except the forget gate at +1 (keeps early memory open).
    pub fn init(cfg: &NetworkConfig, rng: &mut impl Rng) -> LstmParams {
        let mut p = LstmParams::zeros(cfg);
        let bound = 1.0 / (cfg.hidden_units as f64).sqrt();
        for w in p
            .w_x
            .iter_mut()
            .chain(p.w_h.iter_mut())
            .chain(p.dense_w.iter_mut())
        {
            *w = rng.random_range(-bound..bound);
        }
        let h = cfg.hidden_units;
        for k in 0..h {
            p.b[h + k] = 1.0;
        }
        p
    }

    pub fn network(&self) -> NetworkConfig {
        NetworkConfig {
            input_size: self.input_size,
            hidden_units: self.hidden_units,
        }
    }

    pub fn param_count(&self) -> usize {
        self.w_x.len() + self.w_h.len() + self.b.len() + self.dense_w.len() + self.dense_b.len()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn tensors(&self) -> [&Vec<f64>; 5] {
        [&self.w_x, &self.w_h, &self.b, &self.dense_w, &self.dense_b]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut Vec<f64>; 5] {
        [
            &mut self.w_x,
            &mut self.w_h,
            &mut self.b,
            &mut self.dense_w,
            &mut self.dense_b,
        ]
    }

    /// self += other * scale (shapes must match).
    pub(crate) fn add_scaled(&mut self, other: &LstmParams, scale: f64) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += y * scale;
            }
        }
    }

    pub(crate) fn scale(&mut self, s: f64) {
        for t in self.tensors_mut() {
            for x in t.iter_mut() {
                *x *= s;
            }
        }
    }

    /// Flattened view of every parameter, used by the gradient checks.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for t in self.tensors() {
            out.extend_from_slice(t);
        }
        out
    }

    /// Mutable access to the i-th flattened parameter.
    pub fn nudge(&mut self, index: usize, delta: f64) {
        let mut i = index;
        for t in self.tensors_mut() {
            if i < t.len() {
                t[i] += delta;
                return;
            }
            i -= t.len();
        }
        panic!("parameter index {index} out of range");
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Activations retained by [`forward`] for the backward pass.
pub struct ForwardCache {
    input_size: usize,
    hidden_units: usize,
    steps: usize,
    xs: Vec<f64>,         // T x F
    gates: Vec<f64>,      // T x 4H, post-activation, (i, f, g, o) blocks
    cells: Vec<f64>,      // T x H
    tanh_cells: Vec<f64>, // T x H
    hiddens: Vec<f64>,    // T x H
    probs: [f64; 2],
}

impl ForwardCache {
    pub fn probs(&self) -> [f64; 2] {
        self.probs
    }
}

fn check_shapes(params: &LstmParams, x: &FeatureMatrix) -> Result<()> {
    if x.cols() != params.input_size {
        return Err(Error::Config(format!(
            "input has {} feature columns but the network expects {}",
            x.cols(),
            params.input_size
        )));
    }
    if x.rows() == 0 {
        return Err(Error::Config("forward needs at least one time step".into()));
    }
    Ok(())
}

/// Runs the recurrence from zero initial state over all rows of `x` and
/// returns the softmax probability of the "is-goal" class plus the cache
/// needed for [`backward`].
pub fn forward(params: &LstmParams, x: &FeatureMatrix) -> Result<(f64, ForwardCache)> {
    check_shapes(params, x)?;
    let f = params.input_size;
    let h = params.hidden_units;
    let t_total = x.rows();

    let mut cache = ForwardCache {
        input_size: f,
        hidden_units: h,
        steps: t_total,
        xs: Vec::with_capacity(t_total * f),
        gates: vec![0.0; t_total * 4 * h],
        cells: vec![0.0; t_total * h],
        tanh_cells: vec![0.0; t_total * h],
        hiddens: vec![0.0; t_total * h],
        probs: [0.0; 2],
    };

    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    let mut z = vec![0.0; 4 * h];

    for t in 0..t_total {
        let xt = x.row(t);
        cache.xs.extend_from_slice(xt);
        step_gates(params, xt, &h_prev, &mut z);
        let gates = &mut cache.gates[t * 4 * h..(t + 1) * 4 * h];
        for k in 0..h {
            gates[k] = sigmoid(z[k]);
            gates[h + k] = sigmoid(z[h + k]);
            gates[2 * h + k] = z[2 * h + k].tanh();
            gates[3 * h + k] = sigmoid(z[3 * h + k]);
        }
        for k in 0..h {
            let c = gates[h + k] * c_prev[k] + gates[k] * gates[2 * h + k];
            let tc = c.tanh();
            cache.cells[t * h + k] = c;
            cache.tanh_cells[t * h + k] = tc;
            cache.hiddens[t * h + k] = gates[3 * h + k] * tc;
        }
        c_prev.copy_from_slice(&cache.cells[t * h..(t + 1) * h]);
        h_prev.copy_from_slice(&cache.hiddens[t * h..(t + 1) * h]);
    }

    cache.probs = dense_softmax(params, &h_prev);
    let score = cache.probs[1];
    Ok((score, cache))
}

/// "Is-goal" score after every time step: element `t` equals what
/// [`forward`] would return on the prefix `x[0..=t]`. One O(T) pass.
pub fn prefix_scores(params: &LstmParams, x: &FeatureMatrix) -> Result<Vec<f64>> {
    check_shapes(params, x)?;
    let h = params.hidden_units;
    let t_total = x.rows();
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    let mut z = vec![0.0; 4 * h];
    let mut out = Vec::with_capacity(t_total);
    for t in 0..t_total {
        step_gates(params, x.row(t), &h_prev, &mut z);
        for k in 0..h {
            let i = sigmoid(z[k]);
            let fg = sigmoid(z[h + k]);
            let g = z[2 * h + k].tanh();
            let o = sigmoid(z[3 * h + k]);
            let c = fg * c_prev[k] + i * g;
            c_prev[k] = c;
            h_prev[k] = o * c.tanh();
        }
        out.push(dense_softmax(params, &h_prev)[1]);
    }
    Ok(out)
}

fn step_gates(params: &LstmParams, xt: &[f64], h_prev: &[f64], z: &mut [f64]) {
    let f = params.input_size;
    let h = params.hidden_units;
    for (r, slot) in z.iter_mut().enumerate() {
        let mut acc = params.b[r];
        let wx_row = &params.w_x[r * f..(r + 1) * f];
        for (w, x) in wx_row.iter().zip(xt.iter()) {
            acc += w * x;
        }
        let wh_row = &params.w_h[r * h..(r + 1) * h];
        for (w, hp) in wh_row.iter().zip(h_prev.iter()) {
            acc += w * hp;
        }
        *slot = acc;
    }
}

fn dense_softmax(params: &LstmParams, hidden: &[f64]) -> [f64; 2] {
    let h = params.hidden_units;
    let mut logits = [params.dense_b[0], params.dense_b[1]];
    for (k, hv) in hidden.iter().enumerate() {
        logits[0] += params.dense_w[k] * hv;
        logits[1] += params.dense_w[h + k] * hv;
    }
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let sum = e0 + e1;
    [e0 / sum, e1 / sum]
}

/// Cross-entropy loss of a forward pass against the given label.
pub fn cross_entropy(cache: &ForwardCache, label: bool) -> f64 {
    let p = cache.probs[label as usize];
    -p.ln()
}

/// Exact gradient of the cross-entropy loss with respect to every parameter,
/// by backpropagation through time. The cache must come from a [`forward`]
/// call with the same parameter shapes.
pub fn backward(params: &LstmParams, cache: &ForwardCache, label: bool) -> Result<LstmParams> {
    if cache.input_size != params.input_size || cache.hidden_units != params.hidden_units {
        return Err(Error::Config(format!(
            "stale cache: built for F={},H={} but params are F={},H={}",
            cache.input_size, cache.hidden_units, params.input_size, params.hidden_units
        )));
    }
    let f = params.input_size;
    let h = params.hidden_units;
    let t_total = cache.steps;
    let mut grads = LstmParams::zeros(&params.network());

    // Output layer: d(loss)/d(logits) = softmax - onehot(label).
    let target = label as usize;
    let mut dlogits = [cache.probs[0], cache.probs[1]];
    dlogits[target] -= 1.0;

    let h_last = &cache.hiddens[(t_total - 1) * h..t_total * h];
    let mut dh = vec![0.0; h];
    for (j, &dl) in dlogits.iter().enumerate() {
        grads.dense_b[j] += dl;
        for k in 0..h {
            grads.dense_w[j * h + k] += dl * h_last[k];
            dh[k] += params.dense_w[j * h + k] * dl;
        }
    }

    let mut dc = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    let zero = vec![0.0; h];
    for t in (0..t_total).rev() {
        let gates = &cache.gates[t * 4 * h..(t + 1) * 4 * h];
        let tanh_c = &cache.tanh_cells[t * h..(t + 1) * h];
        let c_prev = if t > 0 {
            &cache.cells[(t - 1) * h..t * h]
        } else {
            &zero[..]
        };
        let h_prev = if t > 0 {
            &cache.hiddens[(t - 1) * h..t * h]
        } else {
            &zero[..]
        };
        let xt = &cache.xs[t * f..(t + 1) * f];

        for k in 0..h {
            let i = gates[k];
            let fg = gates[h + k];
            let g = gates[2 * h + k];
            let o = gates[3 * h + k];
            let d_o = dh[k] * tanh_c[k];
            let dck = dc[k] + dh[k] * o * (1.0 - tanh_c[k] * tanh_c[k]);
            let d_i = dck * g;
            let d_g = dck * i;
            let d_f = dck * c_prev[k];
            dz[k] = d_i * i * (1.0 - i);
            dz[h + k] = d_f * fg * (1.0 - fg);
            dz[2 * h + k] = d_g * (1.0 - g * g);
            dz[3 * h + k] = d_o * o * (1.0 - o);
            dc[k] = dck * fg;
        }

        for (r, &d) in dz.iter().enumerate() {
            grads.b[r] += d;
            let wx_row = &mut grads.w_x[r * f..(r + 1) * f];
            for (gw, x) in wx_row.iter_mut().zip(xt.iter()) {
                *gw += d * x;
            }
            let wh_row = &mut grads.w_h[r * h..(r + 1) * h];
            for (gw, hp) in wh_row.iter_mut().zip(h_prev.iter()) {
                *gw += d * hp;
            }
        }

        for k in dh.iter_mut() {
            *k = 0.0;
        }
        for (r, &d) in dz.iter().enumerate() {
            let wh_row = &params.w_h[r * h..(r + 1) * h];
            for (j, w) in wh_row.iter().enumerate() {
                dh[j] += w * d;
            }
        }
    }

    Ok(grads)
}
