use serde::{Deserialize, Serialize};

use crate::autograd::Gradients;
use crate::model::ParamStore;
use crate::tensor::Matrix;

/// AdamW with decoupled weight decay.
#[derive(Debug, Clone)]
pub struct AdamW {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    m: Vec<Option<Matrix>>,
    v: Vec<Option<Matrix>>,
    t: Vec<u32>,
}

impl AdamW {
    pub fn new(param_count: usize, weight_decay: f64) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            m: vec![None; param_count],
            v: vec![None; param_count],
            t: vec![0; param_count],
        }
    }

    /// Updates every parameter that has a gradient. Parameters absent from
    /// `grads` are left untouched, decay included.
    pub fn step(&mut self, params: &mut ParamStore, grads: &Gradients, lr: f64) {
        let mut ids: Vec<usize> = grads.iter().map(|(id, _)| id).collect();
        ids.sort_unstable();
        for id in ids {
            let g = grads.get(id).expect("listed gradient");
            let (r, c) = g.shape();
            let m = self.m[id].get_or_insert_with(|| Matrix::zeros(r, c));
            let v = self.v[id].get_or_insert_with(|| Matrix::zeros(r, c));
            self.t[id] += 1;
            let t = self.t[id] as i32;
            let bc1 = 1.0 - self.beta1.powi(t);
            let bc2 = 1.0 - self.beta2.powi(t);
            let p = params.get_mut(id);
            for (((pi, &gi), mi), vi) in p
                .as_mut_slice()
                .iter_mut()
                .zip(g.as_slice())
                .zip(m.as_mut_slice())
                .zip(v.as_mut_slice())
            {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * gi;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * gi * gi;
                let update = (*mi / bc1) / ((*vi / bc2).sqrt() + self.eps);
                *pi -= lr * (update + self.weight_decay * *pi);
            }
        }
    }
}

/// Linear warmup to `peak`, then linear decay to zero at `total_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSchedule {
    pub peak: f64,
    pub warmup_steps: usize,
    pub total_steps: usize,
}

impl LinearSchedule {
    pub fn new(peak: f64, total_steps: usize, warmup_fraction: f64) -> Self {
        let warmup_steps = (total_steps as f64 * warmup_fraction).round() as usize;
        Self {
            peak,
            warmup_steps,
            total_steps,
        }
    }

    /// Learning rate for the zero-based optimizer step `step`.
    pub fn lr(&self, step: usize) -> f64 {
        if step < self.warmup_steps {
            return self.peak * (step + 1) as f64 / self.warmup_steps as f64;
        }
        let remaining = self.total_steps.saturating_sub(step);
        let span = self.total_steps.saturating_sub(self.warmup_steps).max(1);
        self.peak * remaining as f64 / span as f64
    }
}

/// Rescales `grads` so their global L2 norm is at most `max_norm`; returns
/// the norm before clipping.
pub fn clip_global_norm(grads: &mut Gradients, max_norm: f64) -> f64 {
    let norm = grads.global_norm();
    if norm > max_norm && norm > 0.0 {
        grads.scale(max_norm / norm);
    }
    norm
}
