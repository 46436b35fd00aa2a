//! Reward shaping over the objective trajectory.
//!
//! The simple reward is the per-step objective drop `D_{t-1} - D_t`, whose
//! cumulative sum telescopes exactly to `D_0 - D_T`: ranking trajectories by
//! total reward is the same as ranking them by final objective. The
//! generalized reward adds a geometrically decaying pull toward beating the
//! baseline, `lambda_t (D_0 - D_t)` with `lambda_t = lambda0 * decay^t`,
//! whose total contribution over any trajectory with `D_t` in `[0, D_0]` is
//! bounded by `D_0 * lambda0 / (1 - decay)`.

use crate::config::{RewardMode, RlConfig};

/// Exploration weight at step `t`.
pub fn lambda_eps(lambda0: f64, decay: f64, t: usize) -> f64 {
    lambda0 * libm::pow(decay, t as f64)
}

/// Reward for the step that moved the objective from `d_prev` to `d_curr`;
/// `t` is the step index of the new state (1 for the first action).
pub fn compute_reward(cfg: &RlConfig, d_prev: f64, d_curr: f64, d0: f64, t: usize) -> f64 {
    let simple = d_prev - d_curr;
    match cfg.reward_mode {
        RewardMode::Simple => simple,
        RewardMode::Generalized => {
            simple + lambda_eps(cfg.lambda0, cfg.reward_decay, t) * (d0 - d_curr)
        }
    }
}

/// Upper bound on the exploration part of the generalized reward summed over
/// an arbitrarily long trajectory with `D_t` in `[0, D_0]`.
pub fn exploration_bound(d0: f64, lambda0: f64, decay: f64) -> f64 {
    d0 * lambda0 / (1.0 - decay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(mode: RewardMode, lambda0: f64, decay: f64) -> RlConfig {
        RlConfig { reward_mode: mode, lambda0, reward_decay: decay, ..RlConfig::default() }
    }

    #[test]
    fn worked_sequence_telescopes() {
        let c = cfg(RewardMode::Simple, 0.0, 0.9);
        let d = [5.0, 3.0, 4.0, 1.0];
        let rewards: alloc::vec::Vec<f64> =
            (1..d.len()).map(|t| compute_reward(&c, d[t - 1], d[t], d[0], t)).collect();
        assert_eq!(rewards, alloc::vec![2.0, -1.0, 3.0]);
        let total: f64 = rewards.iter().sum();
        assert_relative_eq!(total, d[0] - d[d.len() - 1]);
    }

    #[test]
    fn zero_move_and_zero_lambda_give_zero_reward() {
        let c = cfg(RewardMode::Generalized, 0.0, 0.9);
        assert_eq!(compute_reward(&c, 2.0, 2.0, 5.0, 3), 0.0);
        // lambda0 = 0 reduces the generalized form to the simple one.
        let s = cfg(RewardMode::Simple, 0.0, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 1..50 {
            let (a, b, d0) = (rng.random::<f64>(), rng.random::<f64>(), 1.0);
            assert_eq!(compute_reward(&c, a, b, d0, t), compute_reward(&s, a, b, d0, t));
        }
    }

    #[test]
    fn random_trajectories_telescope_exactly() {
        let c = cfg(RewardMode::Simple, 0.0, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let len = rng.random_range(2..40);
            let d: alloc::vec::Vec<f64> =
                (0..len).map(|_| rng.random_range(0.0..3.0)).collect();
            let total: f64 =
                (1..len).map(|t| compute_reward(&c, d[t - 1], d[t], d[0], t)).sum();
            assert_relative_eq!(total, d[0] - d[len - 1], epsilon = 1e-12);
        }
    }

    #[test]
    fn exploration_sum_respects_the_geometric_bound() {
        let (lambda0, decay) = (0.3, 0.9);
        let c = cfg(RewardMode::Generalized, lambda0, decay);
        let s = cfg(RewardMode::Simple, lambda0, decay);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d0 = rng.random_range(0.5..2.0);
            let len = rng.random_range(2..200);
            let mut d_prev = d0;
            let mut explore_sum = 0.0;
            for t in 1..len {
                let d_curr = rng.random_range(0.0..d0);
                explore_sum +=
                    compute_reward(&c, d_prev, d_curr, d0, t) - compute_reward(&s, d_prev, d_curr, d0, t);
                d_prev = d_curr;
            }
            assert!(explore_sum <= exploration_bound(d0, lambda0, decay) + 1e-12);
        }
    }
}
