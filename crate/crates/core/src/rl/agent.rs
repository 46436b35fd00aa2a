//! The twin-delayed deterministic-policy-gradient agent.
//!
//! Update rule per batch: both critics regress onto
//! `y = r + gamma (1 - done) min(Q1', Q2')(s', pi'(s'))` computed entirely
//! from the target networks; every `delay_step` updates the actor ascends
//! `Q1(s, pi(s))` and all three target networks take one soft update with
//! the weight `tau` staying on the target side.

use alloc::vec::Vec;
use rand::Rng;

use crate::config::{GeometryConfig, RlConfig};
use crate::nn::{
    actor_forward, actor_init, critic_forward, critic_init, ActionBounds, Adam, Binder, GradStore,
    Matrix, Params, Tape, ACTION_PARAMS,
};
use crate::rl::env::token_dim;
use crate::rl::replay::Transition;

/// Per-update loss report; the actor entry is present only on delayed steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Losses {
    pub critic1: f64,
    pub critic2: f64,
    pub actor: Option<f64>,
}

pub struct Td3Agent {
    pub actor: Params,
    pub actor_target: Params,
    pub critic1: Params,
    pub critic2: Params,
    pub critic1_target: Params,
    pub critic2_target: Params,
    actor_opt: Adam,
    critic1_opt: Adam,
    critic2_opt: Adam,
    bounds: ActionBounds,
    token_dim: usize,
    n_types: usize,
    updates: u64,
}

/// Splits a batch of flattened states into the two `B x token_dim` state
/// tokens.
fn split_tokens(states: &[&[f64]], token_dim: usize) -> (Matrix, Matrix) {
    let b = states.len();
    let upper = Matrix::from_fn(b, token_dim, |i, j| states[i][j]);
    let lower = Matrix::from_fn(b, token_dim, |i, j| states[i][token_dim + j]);
    (upper, lower)
}

fn one_hot(types: &[usize], n_types: usize) -> Matrix {
    Matrix::from_fn(types.len(), n_types, |i, j| if types[i] == j { 1.0 } else { 0.0 })
}

impl Td3Agent {
    /// Fresh networks; the two critics start from different random draws.
    pub fn new(cfg: &RlConfig, geo: &GeometryConfig, rng: &mut impl Rng) -> Self {
        let td = token_dim(geo.degree);
        let state_dim = 2 * td;
        let actor = actor_init(state_dim, cfg.hidden, cfg.action_types, rng);
        let critic1 = critic_init(td, cfg.action_types, cfg.attn_dim, cfg.hidden, rng);
        let critic2 = critic_init(td, cfg.action_types, cfg.attn_dim, cfg.hidden, rng);
        Td3Agent {
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor,
            critic1,
            critic2,
            actor_opt: Adam::new(cfg.actor_lr),
            critic1_opt: Adam::new(cfg.critic_lr),
            critic2_opt: Adam::new(cfg.critic_lr),
            bounds: ActionBounds::from_geometry(geo),
            token_dim: td,
            n_types: cfg.action_types,
            updates: 0,
        }
    }

    pub fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }

    pub fn updates_taken(&self) -> u64 {
        self.updates
    }

    /// Optimizer state in (actor, critic1, critic2) order, for checkpointing.
    pub fn optimizers(&self) -> (&Adam, &Adam, &Adam) {
        (&self.actor_opt, &self.critic1_opt, &self.critic2_opt)
    }

    /// Restores optimizer state and the update counter saved from
    /// [`Td3Agent::optimizers`] and [`Td3Agent::updates_taken`]. The counter
    /// keeps the delayed actor-update phase aligned across a reload.
    pub fn restore_training_state(
        &mut self,
        updates: u64,
        actor_opt: Adam,
        critic1_opt: Adam,
        critic2_opt: Adam,
    ) {
        self.updates = updates;
        self.actor_opt = actor_opt;
        self.critic1_opt = critic1_opt;
        self.critic2_opt = critic2_opt;
    }

    /// Deterministic policy output for one state; `use_target` selects the
    /// target actor, which is what action selection during training uses.
    pub fn act(&self, state: &[f64], use_target: bool) -> ([f64; ACTION_PARAMS], usize) {
        let params = if use_target { &self.actor_target } else { &self.actor };
        let mut tape = Tape::new();
        let mut binder = Binder::new(params);
        let x = tape.leaf(Matrix::from_vec(1, state.len(), state.to_vec()));
        let out = actor_forward(&mut tape, &mut binder, x, &self.bounds);
        let ap = tape.value(out.action_params);
        let mut action = [0.0; ACTION_PARAMS];
        for (k, slot) in action.iter_mut().enumerate() {
            *slot = ap.get(0, k);
        }
        let probs = tape.value(out.type_probs);
        let mut best = 0;
        for j in 1..self.n_types {
            if probs.get(0, j) > probs.get(0, best) {
                best = j;
            }
        }
        (action, best)
    }

    /// Critic targets `y` for a batch; exposed for the reduction tests.
    pub(crate) fn compute_targets(&self, batch: &[Transition], gamma: f64) -> Vec<f64> {
        let next: Vec<&[f64]> = batch.iter().map(|t| t.next_state.as_slice()).collect();
        let (nu, nl) = split_tokens(&next, self.token_dim);
        let b = batch.len();
        let full = Matrix::from_fn(b, 2 * self.token_dim, |i, j| next[i][j]);

        let mut tape = Tape::new();
        let mut ab = Binder::new(&self.actor_target);
        let x = tape.leaf(full);
        let pi = actor_forward(&mut tape, &mut ab, x, &self.bounds);

        let (u, l) = (tape.leaf(nu), tape.leaf(nl));
        let mut c1b = Binder::new(&self.critic1_target);
        let q1 = critic_forward(&mut tape, &mut c1b, u, l, pi.type_probs, pi.action_params);
        let mut c2b = Binder::new(&self.critic2_target);
        let q2 = critic_forward(&mut tape, &mut c2b, u, l, pi.type_probs, pi.action_params);

        let (q1v, q2v) = (tape.value(q1), tape.value(q2));
        batch
            .iter()
            .enumerate()
            .map(|(i, tr)| {
                let bootstrap = if tr.done { 0.0 } else { q1v.get(i, 0).min(q2v.get(i, 0)) };
                tr.reward + gamma * bootstrap
            })
            .collect()
    }

    /// One TD3 update on a sampled batch.
    pub fn update(&mut self, batch: &[Transition], cfg: &RlConfig) -> Losses {
        assert!(!batch.is_empty());
        self.updates += 1;
        let b = batch.len();

        let states: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
        let (su, sl) = split_tokens(&states, self.token_dim);
        let a_type = one_hot(
            &batch.iter().map(|t| t.action_type).collect::<Vec<_>>(),
            self.n_types,
        );
        let a_par = Matrix::from_fn(b, ACTION_PARAMS, |i, j| batch[i].action_params[j]);

        let targets = self.compute_targets(batch, cfg.gamma);
        let y = Matrix::from_fn(b, 1, |i, _| targets[i]);

        let c1_loss = {
            let mut tape = Tape::new();
            let mut binder = Binder::new(&self.critic1);
            let u = tape.leaf(su.clone());
            let l = tape.leaf(sl.clone());
            let at = tape.leaf(a_type.clone());
            let ap = tape.leaf(a_par.clone());
            let q = critic_forward(&mut tape, &mut binder, u, l, at, ap);
            let yv = tape.leaf(y.clone());
            let diff = tape.sub(q, yv);
            let sq = tape.mul(diff, diff);
            let loss = tape.mean_all(sq);
            let grads = tape.backward(loss);
            let mut store = GradStore::new();
            binder.collect_into(&grads, &mut store);
            self.critic1_opt.step(&mut self.critic1, &store);
            tape.value(loss).get(0, 0)
        };
        let c2_loss = {
            let mut tape = Tape::new();
            let mut binder = Binder::new(&self.critic2);
            let u = tape.leaf(su.clone());
            let l = tape.leaf(sl.clone());
            let at = tape.leaf(a_type.clone());
            let ap = tape.leaf(a_par.clone());
            let q = critic_forward(&mut tape, &mut binder, u, l, at, ap);
            let yv = tape.leaf(y.clone());
            let diff = tape.sub(q, yv);
            let sq = tape.mul(diff, diff);
            let loss = tape.mean_all(sq);
            let grads = tape.backward(loss);
            let mut store = GradStore::new();
            binder.collect_into(&grads, &mut store);
            self.critic2_opt.step(&mut self.critic2, &store);
            tape.value(loss).get(0, 0)
        };

        let mut actor_loss = None;
        if self.updates % cfg.delay_step as u64 == 0 {
            let full = Matrix::from_fn(b, 2 * self.token_dim, |i, j| states[i][j]);
            let mut tape = Tape::new();
            let mut abinder = Binder::new(&self.actor);
            let x = tape.leaf(full);
            let pi = actor_forward(&mut tape, &mut abinder, x, &self.bounds);
            let mut cbinder = Binder::new(&self.critic1);
            let u = tape.leaf(su.clone());
            let l = tape.leaf(sl.clone());
            let q = critic_forward(&mut tape, &mut cbinder, u, l, pi.type_probs, pi.action_params);
            let mq = tape.mean_all(q);
            let loss = tape.affine(mq, -1.0, 0.0);
            let grads = tape.backward(loss);
            // Only the actor steps here; the critic parameters in this graph
            // are carriers for the chain rule.
            let mut store = GradStore::new();
            abinder.collect_into(&grads, &mut store);
            self.actor_opt.step(&mut self.actor, &store);
            actor_loss = Some(tape.value(loss).get(0, 0));

            self.actor_target.soft_update_from(&self.actor, cfg.tau);
            self.critic1_target.soft_update_from(&self.critic1, cfg.tau);
            self.critic2_target.soft_update_from(&self.critic2, cfg.tau);
        }

        Losses { critic1: c1_loss, critic2: c2_loss, actor: actor_loss }
    }
}
