//! The training loop: random warmup episodes, then epochs of environment
//! steps with one agent update per step once the buffer holds a batch.
//!
//! Exploration combines epsilon-greedy random actions, OU noise on the
//! policy output, an opposite-action retry whenever a step's reward falls
//! below the retry threshold, and a "similar action" requeue after
//! unusually good steps. Episodes reset early when the cumulative reward
//! drops below the configured floor.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::config::GeometryConfig;
use crate::error::Result;
use crate::geom::{AirfoilShape, DeformAction};
use crate::nn::ACTION_PARAMS;
use crate::rl::agent::{Losses, Td3Agent};
use crate::rl::env::{state_vector, Env, EnvState};
use crate::rl::noise::OuNoise;
use crate::rl::replay::{ReplayBuffer, Transition};

/// One trace record; retries append an extra flagged row, so the row count
/// is warmup steps + epochs * steps_per_epoch + retries.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub episode: usize,
    /// 0 during warmup, then 1-based.
    pub epoch: usize,
    /// 1-based step within the epoch or warmup episode.
    pub step: usize,
    /// Episode step index after the move.
    pub t: usize,
    pub d: f64,
    pub reward: f64,
    pub cum_reward: f64,
    pub noise_coeff: f64,
    pub epsilon: f64,
    pub critic1_loss: Option<f64>,
    pub critic2_loss: Option<f64>,
    pub actor_loss: Option<f64>,
    pub retry_flag: bool,
    pub infeasible_flag: bool,
}

/// Everything a finished run hands back.
pub struct TrainOutcome {
    pub agent: Td3Agent,
    pub buffer: ReplayBuffer,
    pub trace: Vec<TraceRow>,
    pub final_state: EnvState,
    pub best_d: f64,
    pub best_shape: AirfoilShape,
    pub d0: f64,
}

/// Uniform random action within the configured bounds.
pub fn random_action(geo: &GeometryConfig, rng: &mut impl Rng) -> DeformAction {
    DeformAction {
        x_target: rng.random_range(0.02..0.98),
        y_upper: rng.random_range(-geo.max_step..geo.max_step),
        y_lower: rng.random_range(-geo.max_step..geo.max_step),
        delta: rng.random_range(geo.delta_min..geo.delta_max),
    }
}

/// Exploration noise scale per action parameter: a fixed fraction of each
/// parameter's half-range, so one OU process serves all four intervals.
fn noise_scales(geo: &GeometryConfig) -> [f64; ACTION_PARAMS] {
    [
        0.3 * 0.5,
        0.3 * geo.max_step,
        0.3 * geo.max_step,
        0.3 * 0.5 * (geo.delta_max - geo.delta_min),
    ]
}

fn clamp_action(geo: &GeometryConfig, raw: [f64; ACTION_PARAMS]) -> DeformAction {
    DeformAction {
        x_target: raw[0].clamp(0.01, 0.99),
        y_upper: raw[1].clamp(-geo.max_step, geo.max_step),
        y_lower: raw[2].clamp(-geo.max_step, geo.max_step),
        delta: raw[3].clamp(geo.delta_min, geo.delta_max),
    }
}

/// Epsilon-greedy action selection: with probability `epsilon` a uniform
/// random action, otherwise the target-actor output plus scaled OU noise,
/// clipped back to bounds. Returns the action, its type index and whether
/// the random branch fired.
pub fn select_action(
    agent: &Td3Agent,
    state: &EnvState,
    geo: &GeometryConfig,
    epsilon: f64,
    noise_coeff: f64,
    ou: &mut OuNoise,
    n_types: usize,
    rng: &mut impl Rng,
) -> (DeformAction, usize, bool) {
    if rng.random::<f64>() < epsilon {
        let a = random_action(geo, rng);
        let ty = if n_types > 1 { rng.random_range(0..n_types) } else { 0 };
        return (a, ty, true);
    }
    let sv = state_vector(&state.curves);
    let (p, ty) = agent.act(&sv, true);
    let n = ou.sample(rng);
    let s = noise_scales(geo);
    let raw = [
        p[0] + noise_coeff * s[0] * n[0],
        p[1] + noise_coeff * s[1] * n[1],
        p[2] + noise_coeff * s[2] * n[2],
        p[3] + noise_coeff * s[3] * n[3],
    ];
    (clamp_action(geo, raw), ty, false)
}

fn transition(prev: &EnvState, action: &DeformAction, ty: usize, reward: f64, next: &EnvState, done: bool) -> Transition {
    Transition {
        state: state_vector(&prev.curves),
        action_type: ty,
        action_params: [action.x_target, action.y_upper, action.y_lower, action.delta],
        reward,
        next_state: state_vector(&next.curves),
        done,
    }
}

/// Requeued "similar" action: the displacements jiggled with Gaussian noise
/// of scale `0.1 * max_step`, everything re-clipped.
fn similar_action(geo: &GeometryConfig, a: &DeformAction, rng: &mut impl Rng) -> DeformAction {
    let n1: f64 = StandardNormal.sample(rng);
    let n2: f64 = StandardNormal.sample(rng);
    clamp_action(
        geo,
        [
            a.x_target,
            a.y_upper + 0.1 * geo.max_step * n1,
            a.y_lower + 0.1 * geo.max_step * n2,
            a.delta,
        ],
    )
}

struct Tracker {
    best_d: f64,
    best_shape: AirfoilShape,
}

impl Tracker {
    fn observe(&mut self, s: &EnvState) {
        if s.d < self.best_d {
            self.best_d = s.d;
            self.best_shape = s.shape.clone();
        }
    }
}

/// Runs the full schedule against `env` and returns the trained agent with
/// its trace. Identical seeds produce identical traces.
pub fn train(env: &mut Env, seed: u64) -> Result<TrainOutcome> {
    let cfg = env.config().clone();
    let rl = cfg.rl.clone();
    let geo = cfg.geometry.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agent = Td3Agent::new(&rl, &geo, &mut rng);
    let mut buffer = ReplayBuffer::new(rl.replay_capacity);
    let mut trace: Vec<TraceRow> = Vec::new();

    let baseline = env.reset()?;
    let d0 = baseline.d0;
    let mut tracker = Tracker { best_d: baseline.d, best_shape: baseline.shape.clone() };
    let mut episode = 0usize;

    // Warmup: random actions only, no updates.
    env.max_episode_steps = rl.warmup_steps;
    for _ in 0..rl.warmup_episodes {
        let mut state = baseline.clone();
        let mut cum = 0.0;
        for step in 1..=rl.warmup_steps {
            let action = random_action(&geo, &mut rng);
            let ty = if rl.action_types > 1 { rng.random_range(0..rl.action_types) } else { 0 };
            let (next, reward, done, info) = env.step(&state, &action);
            buffer.push(transition(&state, &action, ty, reward, &next, done));
            cum += reward;
            tracker.observe(&next);
            trace.push(TraceRow {
                episode,
                epoch: 0,
                step,
                t: next.t,
                d: next.d,
                reward,
                cum_reward: cum,
                noise_coeff: 1.0,
                epsilon: rl.epsilon0,
                critic1_loss: None,
                critic2_loss: None,
                actor_loss: None,
                retry_flag: false,
                infeasible_flag: !info.accepted,
            });
            state = next;
            if done {
                break;
            }
        }
        episode += 1;
    }

    // Main phase: the episode runs until early stop; epochs only structure
    // the schedule.
    env.max_episode_steps = usize::MAX;
    let mut state = baseline.clone();
    let mut cum = 0.0;
    let mut epsilon = rl.epsilon0;
    let mut noise_coeff = 1.0;
    let mut ou = OuNoise::new(ACTION_PARAMS, rl.ou_theta, rl.ou_sigma, rl.ou_dt);
    let mut pending: Option<DeformAction> = None;

    for epoch in 1..=rl.epochs {
        if epoch % rl.decay_every == 0 {
            epsilon *= rl.epsilon_decay;
            noise_coeff *= rl.epsilon_decay;
        }
        for step in 1..=rl.steps_per_epoch {
            let (action, ty) = match pending.take() {
                Some(a) => (a, 0),
                None => {
                    let (a, ty, _) = select_action(
                        &agent, &state, &geo, epsilon, noise_coeff, &mut ou, rl.action_types,
                        &mut rng,
                    );
                    (a, ty)
                }
            };

            let prev = state.clone();
            let (next1, r1, _, info1) = env.step(&prev, &action);
            let retried = r1 < rl.min_reward;
            let second = if retried {
                let opp = action.opposite();
                let (next2, r2, _, info2) = env.step(&prev, &opp);
                Some((opp, next2, r2, info2))
            } else {
                None
            };

            let take_second = second.as_ref().map(|(_, _, r2, _)| *r2 > r1).unwrap_or(false);
            let (chosen_action, chosen_next, chosen_r, chosen_info) = match (&second, take_second)
            {
                (Some((opp, next2, r2, info2)), true) => (*opp, next2.clone(), *r2, *info2),
                _ => (action, next1.clone(), r1, info1),
            };

            cum += chosen_r;
            let early_stop = cum < rl.min_cum_reward;

            buffer.push(transition(
                &prev,
                &action,
                ty,
                r1,
                &next1,
                early_stop && !take_second,
            ));
            if let Some((opp, next2, r2, _)) = &second {
                buffer.push(transition(&prev, opp, ty, *r2, next2, early_stop && take_second));
            }
            tracker.observe(&chosen_next);

            let losses: Option<Losses> = if buffer.len() >= rl.batch_small {
                let batch_size =
                    if buffer.len() >= rl.batch_switch { rl.batch_large } else { rl.batch_small };
                if buffer.len() >= batch_size {
                    let batch = buffer.sample(batch_size, &rl.fractions, &mut rng)?;
                    Some(agent.update(&batch, &rl))
                } else {
                    None
                }
            } else {
                None
            };

            let base_row = TraceRow {
                episode,
                epoch,
                step,
                t: next1.t,
                d: next1.d,
                reward: r1,
                cum_reward: if take_second { cum - chosen_r + r1 } else { cum },
                noise_coeff,
                epsilon,
                critic1_loss: losses.map(|l| l.critic1),
                critic2_loss: losses.map(|l| l.critic2),
                actor_loss: losses.and_then(|l| l.actor),
                retry_flag: false,
                infeasible_flag: !info1.accepted,
            };
            trace.push(base_row);
            if let Some((_, next2, r2, info2)) = &second {
                trace.push(TraceRow {
                    t: next2.t,
                    d: next2.d,
                    reward: *r2,
                    cum_reward: cum,
                    retry_flag: true,
                    infeasible_flag: !info2.accepted,
                    critic1_loss: None,
                    critic2_loss: None,
                    actor_loss: None,
                    ..trace.last().unwrap().clone()
                });
            }

            // Good steps queue a slightly jiggled copy of themselves; the
            // threshold tracks the top decile of buffer rewards once there
            // is enough history to estimate one.
            let threshold = if buffer.len() >= 10 {
                buffer.reward_quantile(0.9).unwrap()
            } else {
                rl.good_reward
            };
            if chosen_info.accepted && chosen_r > threshold {
                pending = Some(similar_action(&geo, &chosen_action, &mut rng));
            }

            if early_stop {
                episode += 1;
                state = baseline.clone();
                cum = 0.0;
                ou.reset();
                pending = None;
            } else {
                state = chosen_next;
            }
        }
    }

    Ok(TrainOutcome {
        agent,
        buffer,
        trace,
        final_state: state,
        best_d: tracker.best_d,
        best_shape: tracker.best_shape,
        d0,
    })
}
