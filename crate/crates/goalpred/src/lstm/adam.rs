//! Bias-corrected Adam over the parameter bundle.

use super::LstmParams;
use crate::lstm::train::TrainConfig;

/// One Adam update over a flat slice. `t` is the 1-based step counter;
/// the learning rate, betas and epsilon come from the train config.
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    cfg: &TrainConfig,
) {
    debug_assert_eq!(params.len(), grads.len());
    let (beta1, beta2) = (cfg.beta1, cfg.beta2);
    let bc1 = 1.0 - beta1.powi(t as i32);
    let bc2 = 1.0 - beta2.powi(t as i32);
    for (i, p) in params.iter_mut().enumerate() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

/// First/second moment accumulators plus the step counter.
pub struct AdamState {
    m: LstmParams,
    v: LstmParams,
    step: u64,
}

impl AdamState {
    pub fn new(shape_of: &LstmParams) -> AdamState {
        let net = shape_of.network();
        AdamState {
            m: LstmParams::zeros(&net),
            v: LstmParams::zeros(&net),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one bias-corrected update and increments the step counter.
    pub fn apply(&mut self, params: &mut LstmParams, grads: &LstmParams, cfg: &TrainConfig) {
        self.step += 1;
        let t = self.step;
        let ps = params.tensors_mut();
        let gs = grads.tensors();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for (((p, g), m), v) in ps.into_iter().zip(gs).zip(ms).zip(vs) {
            adam_update(p, g, m, v, t, cfg);
        }
    }
}
