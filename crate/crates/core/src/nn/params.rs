//! Named parameter collections shared by the actor and critic networks.
//!
//! Parameters live outside any tape; each forward pass binds them as leaves
//! through a [`Binder`], and gradients flow back into a [`GradStore`] keyed
//! by the same names. `BTreeMap` keeps every iteration order fixed, which the
//! determinism guarantees rely on.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};

use super::matrix::Matrix;
use super::tape::{Gradients, Tape, Var};

/// A named set of parameter matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    map: BTreeMap<String, Matrix>,
}

impl Params {
    pub fn new() -> Self {
        Params { map: BTreeMap::new() }
    }

    pub fn insert(&mut self, name: &str, m: Matrix) {
        let prev = self.map.insert(name.to_string(), m);
        assert!(prev.is_none(), "duplicate parameter name {name}");
    }

    /// Panics on a missing name: a lookup failure is a wiring bug, not a
    /// runtime condition.
    pub fn get(&self, name: &str) -> &Matrix {
        self.map.get(name).unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Matrix {
        self.map.get_mut(name).unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Matrix)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Total scalar parameter count.
    pub fn scalar_count(&self) -> usize {
        self.map.values().map(|m| m.data().len()).sum()
    }

    /// `self = tau * self + (1 - tau) * online`, element-wise; the weight
    /// `tau` stays on the target side.
    pub fn soft_update_from(&mut self, online: &Params, tau: f64) {
        assert_eq!(self.map.len(), online.map.len(), "parameter set mismatch");
        for ((name, t), (oname, o)) in self.map.iter_mut().zip(online.map.iter()) {
            assert_eq!(name, oname, "parameter name mismatch");
            assert!(t.same_shape(o), "parameter shape mismatch for {name}");
            for (tv, &ov) in t.data_mut().iter_mut().zip(o.data()) {
                *tv = tau * *tv + (1.0 - tau) * ov;
            }
        }
    }

    /// Largest absolute entry difference against another set with the same
    /// names and shapes.
    pub fn max_abs_diff(&self, other: &Params) -> f64 {
        assert_eq!(self.map.len(), other.map.len(), "parameter set mismatch");
        let mut worst = 0.0_f64;
        for ((name, a), (oname, b)) in self.map.iter().zip(other.map.iter()) {
            assert_eq!(name, oname, "parameter name mismatch");
            for (&x, &y) in a.data().iter().zip(b.data()) {
                worst = worst.max(libm::fabs(x - y));
            }
        }
        worst
    }
}

impl Default for Params {
    fn default() -> Self {
        Params::new()
    }
}

/// Inserts a dense layer `name.w` (`fan_in x fan_out`, scaled uniform
/// fan-in) and `name.b` (`1 x fan_out`, zero).
pub fn dense_init(params: &mut Params, name: &str, fan_in: usize, fan_out: usize, rng: &mut impl rand::Rng) {
    let scale = 1.0 / libm::sqrt(fan_in as f64);
    params.insert(&format!("{name}.w"), Matrix::uniform(fan_in, fan_out, scale, rng));
    params.insert(&format!("{name}.b"), Matrix::zeros(1, fan_out));
}

/// Inserts a square bias-free projection, as used inside attention blocks.
pub fn proj_init(params: &mut Params, name: &str, dim_in: usize, dim_out: usize, rng: &mut impl rand::Rng) {
    let scale = 1.0 / libm::sqrt(dim_in as f64);
    params.insert(name, Matrix::uniform(dim_in, dim_out, scale, rng));
}

/// Accumulated parameter gradients keyed by name.
#[derive(Debug, Clone, Default)]
pub struct GradStore {
    map: BTreeMap<String, Matrix>,
}

impl GradStore {
    pub fn new() -> Self {
        GradStore { map: BTreeMap::new() }
    }

    pub fn add(&mut self, name: &str, grad: &Matrix) {
        match self.map.get_mut(name) {
            Some(g) => g.add_scaled(grad, 1.0),
            None => {
                self.map.insert(name.to_string(), grad.clone());
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.map.get(name)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Matrix)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn max_abs(&self) -> f64 {
        self.map.values().fold(0.0_f64, |m, g| m.max(g.max_abs()))
    }
}

/// Binds one parameter set to one tape, interning each parameter as a leaf
/// the first time it is referenced.
pub struct Binder<'a> {
    params: &'a Params,
    bound: BTreeMap<String, Var>,
}

impl<'a> Binder<'a> {
    pub fn new(params: &'a Params) -> Self {
        Binder { params, bound: BTreeMap::new() }
    }

    pub fn var(&mut self, tape: &mut Tape, name: &str) -> Var {
        if let Some(&v) = self.bound.get(name) {
            return v;
        }
        let v = tape.leaf(self.params.get(name).clone());
        self.bound.insert(name.to_string(), v);
        v
    }

    /// Gathers the gradients of every bound parameter into `store`.
    pub fn collect_into(&self, grads: &Gradients, store: &mut GradStore) {
        for (name, &v) in &self.bound {
            store.add(name, grads.wrt(v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_params(seed: u64) -> Params {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Params::new();
        dense_init(&mut p, "l1", 3, 4, &mut rng);
        dense_init(&mut p, "l2", 4, 1, &mut rng);
        p
    }

    #[test]
    fn soft_update_endpoints_and_midpoint() {
        let online = toy_params(1);
        let mut target = toy_params(2);

        let mut copy = target.clone();
        copy.soft_update_from(&online, 0.0);
        assert_eq!(copy.max_abs_diff(&online), 0.0);

        let mut frozen = target.clone();
        frozen.soft_update_from(&online, 1.0);
        assert_eq!(frozen.max_abs_diff(&target), 0.0);

        let mut zeros = Params::new();
        zeros.insert("x", Matrix::zeros(1, 1));
        let mut ones = Params::new();
        ones.insert("x", Matrix::from_vec(1, 1, alloc::vec![1.0]));
        zeros.soft_update_from(&ones, 0.995);
        assert_relative_eq!(zeros.get("x").get(0, 0), 0.005, max_relative = 1e-12);

        target.soft_update_from(&online, 0.5);
    }

    #[test]
    fn binder_reuses_leaves_and_collects_gradients() {
        let p = toy_params(3);
        let mut tape = Tape::new();
        let mut binder = Binder::new(&p);
        let w1 = binder.var(&mut tape, "l1.w");
        let again = binder.var(&mut tape, "l1.w");
        assert_eq!(w1, again);

        let x = tape.leaf(Matrix::from_vec(2, 3, alloc::vec![0.1; 6]));
        let h = tape.matmul(x, w1);
        let b1 = binder.var(&mut tape, "l1.b");
        let h = tape.add_bias(h, b1);
        let out = tape.mean_all(h);
        let grads = tape.backward(out);

        let mut store = GradStore::new();
        binder.collect_into(&grads, &mut store);
        assert!(store.get("l1.w").is_some());
        assert!(store.get("l1.b").is_some());
        assert!(store.get("l2.w").is_none(), "unused parameters stay unbound");
        // Accumulation doubles the stored gradient.
        let before = store.get("l1.b").unwrap().clone();
        binder.collect_into(&grads, &mut store);
        let after = store.get("l1.b").unwrap();
        for (b, a) in before.data().iter().zip(after.data()) {
            assert_relative_eq!(2.0 * b, a, max_relative = 1e-15);
        }
    }
}
