//! Adaptive-moment optimizer with bias-corrected first and second moments.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

use super::matrix::Matrix;
use super::params::{GradStore, Params};

pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: BTreeMap<String, Matrix>,
    v: BTreeMap<String, Matrix>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// One update over every gradient in `grads`; parameters without a
    /// gradient entry are untouched and keep their moment state.
    pub fn step(&mut self, params: &mut Params, grads: &GradStore) {
        self.t += 1;
        let bc1 = 1.0 - libm::pow(self.beta1, self.t as f64);
        let bc2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for (name, g) in grads.entries() {
            let p = params.get_mut(name);
            assert!(p.same_shape(g), "gradient shape mismatch for {name}");
            let m = self
                .m
                .entry(name.to_string())
                .or_insert_with(|| Matrix::zeros(g.rows(), g.cols()));
            let v = self
                .v
                .entry(name.to_string())
                .or_insert_with(|| Matrix::zeros(g.rows(), g.cols()));
            let (b1, b2) = (self.beta1, self.beta2);
            for k in 0..g.data().len() {
                let gv = g.data()[k];
                m.data_mut()[k] = b1 * m.data()[k] + (1.0 - b1) * gv;
                v.data_mut()[k] = b2 * v.data()[k] + (1.0 - b2) * gv * gv;
                let mhat = m.data()[k] / bc1;
                let vhat = v.data()[k] / bc2;
                p.data_mut()[k] -= self.lr * mhat / (libm::sqrt(vhat) + self.eps);
            }
        }
    }

    /// Moment snapshot for checkpointing, in name order.
    pub fn moments(&self) -> impl Iterator<Item = (&str, &Matrix, &Matrix)> {
        self.m
            .iter()
            .zip(self.v.iter())
            .map(|((k, m), (_, v))| (k.as_str(), m, v))
    }

    /// Restores moment state saved by [`Adam::moments`].
    pub fn restore(&mut self, t: u64, entries: impl Iterator<Item = (String, Matrix, Matrix)>) {
        self.t = t;
        self.m.clear();
        self.v.clear();
        for (name, m, v) in entries {
            self.m.insert(name.clone(), m);
            self.v.insert(name, v);
        }
    }
}
