//! Adam optimizer over [`ParameterStore`]s.

use crate::tensor::ParameterStore;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    m: ParameterStore,
    v: ParameterStore,
    step: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, params: &ParameterStore) -> Self {
        Adam {
            config,
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }

    /// Applies one Adam update in place. Tensors are visited in insertion
    /// order so repeated runs are bit-identical.
    pub fn update(&mut self, params: &mut ParameterStore, grads: &ParameterStore) {
        self.step += 1;
        let t = self.step as f64;
        let c = self.config;
        let bias1 = 1.0 - c.beta1.powf(t);
        let bias2 = 1.0 - c.beta2.powf(t);
        for name in params.names().to_vec() {
            let g = grads.get(&name).data.clone();
            let m = self.m.get_mut(&name);
            for (mi, gi) in m.data.iter_mut().zip(&g) {
                *mi = c.beta1 * *mi + (1.0 - c.beta1) * gi;
            }
            let m_data = m.data.clone();
            let v = self.v.get_mut(&name);
            for (vi, gi) in v.data.iter_mut().zip(&g) {
                *vi = c.beta2 * *vi + (1.0 - c.beta2) * gi * gi;
            }
            let v_data = v.data.clone();
            let p = params.get_mut(&name);
            for ((pi, mi), vi) in p.data.iter_mut().zip(&m_data).zip(&v_data) {
                let m_hat = mi / bias1;
                let v_hat = vi / bias2;
                *pi -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
            }
        }
    }
}
