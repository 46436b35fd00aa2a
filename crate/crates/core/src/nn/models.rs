//! The actor and critic architectures.
//!
//! The actor is a plain two-layer softsign trunk over the flattened control
//! point state, with a bounded head for the four continuous action
//! parameters and a softmax head over action types. The critic projects
//! three token streams (two state tokens, an action-type token, an
//! action-parameter token) to a shared width, runs one self-attention block
//! over the state tokens and one cross-attention block against the action
//! tokens, then pools into a SELU trunk that emits a scalar value estimate.
//!
//! Token attention is laid out for a fixed, tiny token count: each token is
//! a separate batch matrix, and attention weights are built from row-wise
//! dot products, so a single recorded graph handles any batch size.

use alloc::format;
use alloc::vec::Vec;

use super::params::{dense_init, proj_init, Binder, Params};
use super::tape::{Tape, Var};
use crate::config::GeometryConfig;

/// Continuous action-parameter head width: bump center, upper and lower
/// displacement, bump width.
pub const ACTION_PARAMS: usize = 4;

/// Output ranges of the bounded actor heads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionBounds {
    pub max_step: f64,
    pub delta_min: f64,
    pub delta_max: f64,
}

impl ActionBounds {
    pub fn from_geometry(geo: &GeometryConfig) -> Self {
        ActionBounds {
            max_step: geo.max_step,
            delta_min: geo.delta_min,
            delta_max: geo.delta_max,
        }
    }
}

/// One dense layer with bias: `x W + b`.
fn dense(tape: &mut Tape, binder: &mut Binder, name: &str, x: Var) -> Var {
    let w = binder.var(tape, &format!("{name}.w"));
    let b = binder.var(tape, &format!("{name}.b"));
    let h = tape.matmul(x, w);
    tape.add_bias(h, b)
}

/// Scaled-dot-product attention over explicit token lists.
///
/// Every entry of `queries` and `keys_values` is a `B x d` batch matrix.
/// Returns one context per query: `ctx_i = sum_j softmax_j(q_i k_j / sqrt(d))
/// v_j`, with no residual connection; callers add one where the architecture
/// wants it.
pub fn attention(
    tape: &mut Tape,
    wq: Var,
    wk: Var,
    wv: Var,
    queries: &[Var],
    keys_values: &[Var],
) -> Vec<Var> {
    assert!(!queries.is_empty() && !keys_values.is_empty());
    let d = tape.value(wq).cols();
    let inv_sqrt_d = 1.0 / libm::sqrt(d as f64);

    let ks: Vec<Var> = keys_values.iter().map(|&t| tape.matmul(t, wk)).collect();
    let vs: Vec<Var> = keys_values.iter().map(|&t| tape.matmul(t, wv)).collect();

    let mut contexts = Vec::with_capacity(queries.len());
    for &q in queries {
        let qp = tape.matmul(q, wq);
        let scores: Vec<Var> = ks
            .iter()
            .map(|&k| {
                let s = tape.rowwise_dot(qp, k);
                tape.affine(s, inv_sqrt_d, 0.0)
            })
            .collect();
        let stacked = tape.concat_cols(&scores);
        let weights = tape.softmax(stacked);
        let mut ctx: Option<Var> = None;
        for (j, &v) in vs.iter().enumerate() {
            let wj = tape.col(weights, j);
            let term = tape.scale_rows(v, wj);
            ctx = Some(match ctx {
                Some(acc) => tape.add(acc, term),
                None => term,
            });
        }
        contexts.push(ctx.unwrap());
    }
    contexts
}

/// Fresh actor parameters: `state_dim -> hidden -> hidden` softsign trunk
/// plus the two heads.
pub fn actor_init(
    state_dim: usize,
    hidden: usize,
    n_types: usize,
    rng: &mut impl rand::Rng,
) -> Params {
    let mut p = Params::new();
    dense_init(&mut p, "l1", state_dim, hidden, rng);
    dense_init(&mut p, "l2", hidden, hidden, rng);
    dense_init(&mut p, "head_par", hidden, ACTION_PARAMS, rng);
    dense_init(&mut p, "head_type", hidden, n_types, rng);
    p
}

/// Actor outputs: bounded continuous parameters and type probabilities.
pub struct ActorOut {
    /// `B x 4`: `(x_target, y_upper, y_lower, delta)`, each already mapped
    /// into its configured interval.
    pub action_params: Var,
    /// `B x n_types`, rows summing to one.
    pub type_probs: Var,
}

/// Forward pass of the actor on a `B x state_dim` input.
///
/// The head mapping keeps every output strictly inside its interval:
/// `x_target` in (0, 1), the displacements in `(-max_step, max_step)` and
/// `delta` in `(delta_min, delta_max)`.
pub fn actor_forward(tape: &mut Tape, binder: &mut Binder, x: Var, bounds: &ActionBounds) -> ActorOut {
    let h = dense(tape, binder, "l1", x);
    let h = tape.softsign(h);
    let h = dense(tape, binder, "l2", h);
    let h = tape.softsign(h);

    let raw = dense(tape, binder, "head_par", h);
    let c0 = tape.col(raw, 0);
    let c0 = tape.softsign(c0);
    let x_target = tape.affine(c0, 0.5, 0.5);
    let c1 = tape.col(raw, 1);
    let c1 = tape.softsign(c1);
    let y_upper = tape.affine(c1, bounds.max_step, 0.0);
    let c2 = tape.col(raw, 2);
    let c2 = tape.softsign(c2);
    let y_lower = tape.affine(c2, bounds.max_step, 0.0);
    let c3 = tape.col(raw, 3);
    let c3 = tape.softsign(c3);
    let half = 0.5 * (bounds.delta_max - bounds.delta_min);
    let mid = 0.5 * (bounds.delta_max + bounds.delta_min);
    let delta = tape.affine(c3, half, mid);
    let action_params = tape.concat_cols(&[x_target, y_upper, y_lower, delta]);

    let t = dense(tape, binder, "head_type", h);
    let type_probs = tape.softmax(t);

    ActorOut { action_params, type_probs }
}

/// Fresh critic parameters.
pub fn critic_init(
    token_dim: usize,
    n_types: usize,
    attn_dim: usize,
    hidden: usize,
    rng: &mut impl rand::Rng,
) -> Params {
    let mut p = Params::new();
    dense_init(&mut p, "proj_state", token_dim, attn_dim, rng);
    dense_init(&mut p, "proj_type", n_types, attn_dim, rng);
    dense_init(&mut p, "proj_par", ACTION_PARAMS, attn_dim, rng);
    proj_init(&mut p, "sa.q", attn_dim, attn_dim, rng);
    proj_init(&mut p, "sa.k", attn_dim, attn_dim, rng);
    proj_init(&mut p, "sa.v", attn_dim, attn_dim, rng);
    proj_init(&mut p, "ca.q", attn_dim, attn_dim, rng);
    proj_init(&mut p, "ca.k", attn_dim, attn_dim, rng);
    proj_init(&mut p, "ca.v", attn_dim, attn_dim, rng);
    dense_init(&mut p, "t1", attn_dim, hidden, rng);
    dense_init(&mut p, "t2", hidden, hidden, rng);
    dense_init(&mut p, "q_out", hidden, 1, rng);
    p
}

/// Forward pass of the critic.
///
/// `upper`/`lower` are the two `B x token_dim` state tokens, `a_type` the
/// `B x n_types` action encoding and `a_par` the `B x 4` action parameters.
/// Returns the `B x 1` value estimate.
pub fn critic_forward(
    tape: &mut Tape,
    binder: &mut Binder,
    upper: Var,
    lower: Var,
    a_type: Var,
    a_par: Var,
) -> Var {
    let su = dense(tape, binder, "proj_state", upper);
    let sl = dense(tape, binder, "proj_state", lower);
    let at = dense(tape, binder, "proj_type", a_type);
    let ap = dense(tape, binder, "proj_par", a_par);

    let wq = binder.var(tape, "sa.q");
    let wk = binder.var(tape, "sa.k");
    let wv = binder.var(tape, "sa.v");
    let ctx = attention(tape, wq, wk, wv, &[su, sl], &[su, sl]);
    let hu = tape.add(su, ctx[0]);
    let hl = tape.add(sl, ctx[1]);

    let wq = binder.var(tape, "ca.q");
    let wk = binder.var(tape, "ca.k");
    let wv = binder.var(tape, "ca.v");
    let ctx = attention(tape, wq, wk, wv, &[hu, hl], &[at, ap]);
    let gu = tape.add(hu, ctx[0]);
    let gl = tape.add(hl, ctx[1]);

    let sum = tape.add(gu, gl);
    let pooled = tape.affine(sum, 0.5, 0.0);

    let h = dense(tape, binder, "t1", pooled);
    let h = tape.selu(h);
    let h = dense(tape, binder, "t2", h);
    let h = tape.selu(h);
    dense(tape, binder, "q_out", h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::matrix::Matrix;
    use crate::nn::params::GradStore;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bounds() -> ActionBounds {
        ActionBounds { max_step: 0.005, delta_min: 0.2, delta_max: 0.8 }
    }

    #[test]
    fn actor_outputs_respect_their_intervals() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params = actor_init(10, 16, 3, &mut rng);
        let b = bounds();
        for trial in 0..20 {
            let mut tape = Tape::new();
            let mut binder = Binder::new(&params);
            let x = tape.leaf(Matrix::uniform(4, 10, 3.0, &mut rng));
            let out = actor_forward(&mut tape, &mut binder, x, &b);
            let ap = tape.value(out.action_params);
            for i in 0..ap.rows() {
                let (xt, yu, yl, dl) =
                    (ap.get(i, 0), ap.get(i, 1), ap.get(i, 2), ap.get(i, 3));
                assert!(xt > 0.0 && xt < 1.0, "trial {trial}: x_target {xt}");
                assert!(yu.abs() < b.max_step && yl.abs() < b.max_step);
                assert!(dl > b.delta_min && dl < b.delta_max, "delta {dl}");
                let psum: f64 = tape.value(out.type_probs).row(i).iter().sum();
                assert_relative_eq!(psum, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_token_self_attention_is_the_value_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut tape = Tape::new();
        let wq = tape.leaf(Matrix::uniform(6, 6, 0.5, &mut rng));
        let wk = tape.leaf(Matrix::uniform(6, 6, 0.5, &mut rng));
        let wv = tape.leaf(Matrix::uniform(6, 6, 0.5, &mut rng));
        let t = tape.leaf(Matrix::uniform(3, 6, 1.0, &mut rng));
        let ctx = attention(&mut tape, wq, wk, wv, &[t], &[t]);
        let direct = tape.matmul(t, wv);
        for (c, d) in tape.value(ctx[0]).data().iter().zip(tape.value(direct).data()) {
            assert_relative_eq!(c, d, max_relative = 1e-12);
        }
    }

    #[test]
    fn attention_is_invariant_to_key_value_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut tape = Tape::new();
        let wq = tape.leaf(Matrix::uniform(5, 5, 0.6, &mut rng));
        let wk = tape.leaf(Matrix::uniform(5, 5, 0.6, &mut rng));
        let wv = tape.leaf(Matrix::uniform(5, 5, 0.6, &mut rng));
        let q = tape.leaf(Matrix::uniform(2, 5, 1.0, &mut rng));
        let k1 = tape.leaf(Matrix::uniform(2, 5, 1.0, &mut rng));
        let k2 = tape.leaf(Matrix::uniform(2, 5, 1.0, &mut rng));
        let k3 = tape.leaf(Matrix::uniform(2, 5, 1.0, &mut rng));
        let a = attention(&mut tape, wq, wk, wv, &[q], &[k1, k2, k3]);
        let b = attention(&mut tape, wq, wk, wv, &[q], &[k3, k1, k2]);
        for (x, y) in tape.value(a[0]).data().iter().zip(tape.value(b[0]).data()) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }

    /// Central finite differences over every critic parameter, with the
    /// composed actor-critic graph as the hardest case.
    #[test]
    fn critic_parameter_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (token_dim, n_types, attn, hidden, batch) = (5, 2, 6, 7, 3);
        let params = critic_init(token_dim, n_types, attn, hidden, &mut rng);
        let upper = Matrix::uniform(batch, token_dim, 1.0, &mut rng);
        let lower = Matrix::uniform(batch, token_dim, 1.0, &mut rng);
        let at = Matrix::uniform(batch, n_types, 1.0, &mut rng);
        let ap = Matrix::uniform(batch, ACTION_PARAMS, 1.0, &mut rng);

        let eval = |p: &Params| -> f64 {
            let mut tape = Tape::new();
            let mut binder = Binder::new(p);
            let u = tape.leaf(upper.clone());
            let l = tape.leaf(lower.clone());
            let t = tape.leaf(at.clone());
            let a = tape.leaf(ap.clone());
            let q = critic_forward(&mut tape, &mut binder, u, l, t, a);
            let m = tape.mean_all(q);
            tape.value(m).get(0, 0)
        };

        let mut tape = Tape::new();
        let mut binder = Binder::new(&params);
        let u = tape.leaf(upper.clone());
        let l = tape.leaf(lower.clone());
        let t = tape.leaf(at.clone());
        let a = tape.leaf(ap.clone());
        let q = critic_forward(&mut tape, &mut binder, u, l, t, a);
        let m = tape.mean_all(q);
        let grads = tape.backward(m);
        let mut store = GradStore::new();
        binder.collect_into(&grads, &mut store);

        let names: alloc::vec::Vec<alloc::string::String> =
            params.entries().map(|(n, _)| alloc::string::String::from(n)).collect();
        let h = 1e-6;
        let mut checked = 0usize;
        for name in &names {
            let n_entries = params.get(name).data().len();
            // Spot-check a deterministic subset of each matrix; full sweeps
            // of every entry would re-run the forward pass thousands of
            // times for no extra coverage.
            let stride = (n_entries / 7).max(1);
            for e in (0..n_entries).step_by(stride) {
                let mut plus = params.clone();
                plus.get_mut(name).data_mut()[e] += h;
                let mut minus = params.clone();
                minus.get_mut(name).data_mut()[e] -= h;
                let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
                let ad = store.get(name).unwrap().data()[e];
                assert_relative_eq!(ad, fd, max_relative = 1e-5, epsilon = 1e-9);
                checked += 1;
            }
        }
        assert!(checked > 50);
    }

    /// Actor gradients against finite differences through the bounded heads
    /// and the softmax type head together.
    #[test]
    fn actor_parameter_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (state_dim, hidden, n_types, batch) = (6, 8, 3, 4);
        let params = actor_init(state_dim, hidden, n_types, &mut rng);
        let x = Matrix::uniform(batch, state_dim, 1.0, &mut rng);
        let b = bounds();

        let eval = |p: &Params| -> f64 {
            let mut tape = Tape::new();
            let mut binder = Binder::new(p);
            let xv = tape.leaf(x.clone());
            let out = actor_forward(&mut tape, &mut binder, xv, &b);
            let joined = tape.concat_cols(&[out.action_params, out.type_probs]);
            let m = tape.mean_all(joined);
            tape.value(m).get(0, 0)
        };

        let mut tape = Tape::new();
        let mut binder = Binder::new(&params);
        let xv = tape.leaf(x.clone());
        let out = actor_forward(&mut tape, &mut binder, xv, &b);
        let joined = tape.concat_cols(&[out.action_params, out.type_probs]);
        let m = tape.mean_all(joined);
        let grads = tape.backward(m);
        let mut store = GradStore::new();
        binder.collect_into(&grads, &mut store);

        let names: alloc::vec::Vec<alloc::string::String> =
            params.entries().map(|(n, _)| alloc::string::String::from(n)).collect();
        let h = 1e-6;
        for name in &names {
            let n_entries = params.get(name).data().len();
            let stride = (n_entries / 5).max(1);
            for e in (0..n_entries).step_by(stride) {
                let mut plus = params.clone();
                plus.get_mut(name).data_mut()[e] += h;
                let mut minus = params.clone();
                minus.get_mut(name).data_mut()[e] -= h;
                let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
                let ad = store.get(name).unwrap().data()[e];
                assert_relative_eq!(ad, fd, max_relative = 1e-5, epsilon = 1e-9);
            }
        }
    }

    /// Softsign trunks with residual attention paths must not starve any
    /// parameter of gradient signal on random inputs.
    #[test]
    fn no_parameter_gradient_underflows_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let params = critic_init(5, 2, 6, 7, &mut rng);
        let mut tape = Tape::new();
        let mut binder = Binder::new(&params);
        let u = tape.leaf(Matrix::uniform(3, 5, 1.0, &mut rng));
        let l = tape.leaf(Matrix::uniform(3, 5, 1.0, &mut rng));
        let t = tape.leaf(Matrix::uniform(3, 2, 1.0, &mut rng));
        let a = tape.leaf(Matrix::uniform(3, ACTION_PARAMS, 1.0, &mut rng));
        let q = critic_forward(&mut tape, &mut binder, u, l, t, a);
        let m = tape.mean_all(q);
        let grads = tape.backward(m);
        let mut store = GradStore::new();
        binder.collect_into(&grads, &mut store);
        for (name, g) in store.entries() {
            for &v in g.data() {
                assert!(v != 0.0, "dead gradient entry in {name}");
            }
        }
    }
}
