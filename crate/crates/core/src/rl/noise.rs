//! Ornstein-Uhlenbeck exploration noise.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// One Euler-Maruyama step of the OU process
/// `x' = x + theta (mu - x) dt + sigma sqrt(dt) N(0,1)`.
pub fn ou_step(x: f64, mu: f64, theta: f64, sigma: f64, dt: f64, rng: &mut impl Rng) -> f64 {
    let n: f64 = StandardNormal.sample(rng);
    x + theta * (mu - x) * dt + sigma * libm::sqrt(dt) * n
}

/// Vector-valued OU state, one component per action parameter.
#[derive(Debug, Clone)]
pub struct OuNoise {
    x: Vec<f64>,
    mu: f64,
    theta: f64,
    sigma: f64,
    dt: f64,
}

impl OuNoise {
    pub fn new(dim: usize, theta: f64, sigma: f64, dt: f64) -> Self {
        OuNoise { x: vec![0.0; dim], mu: 0.0, theta, sigma, dt }
    }

    /// Advances every component and returns the new state.
    pub fn sample(&mut self, rng: &mut impl Rng) -> &[f64] {
        for v in self.x.iter_mut() {
            *v = ou_step(*v, self.mu, self.theta, self.sigma, self.dt, rng);
        }
        &self.x
    }

    pub fn reset(&mut self) {
        self.x.iter_mut().for_each(|v| *v = 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mean_is_a_fixed_point_without_diffusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x = 0.7;
        for _ in 0..100 {
            x = ou_step(x, 0.7, 0.15, 0.0, 1.0, &mut rng);
            assert_eq!(x, 0.7);
        }
    }

    #[test]
    fn deterministic_part_decays_geometrically() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (theta, dt) = (0.15, 1.0);
        let mut x = 1.0;
        for k in 1..=20 {
            x = ou_step(x, 0.0, theta, 0.0, dt, &mut rng);
            let expected = libm::pow(1.0 - theta * dt, k as f64);
            approx::assert_relative_eq!(x, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn stationary_variance_matches_the_ou_formula() {
        let (theta, sigma, dt) = (0.15, 0.2, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = 0.0;
        // Burn-in, then a long average of x^2.
        for _ in 0..2_000 {
            x = ou_step(x, 0.0, theta, sigma, dt, &mut rng);
        }
        let n = 200_000;
        let mut acc = 0.0;
        for _ in 0..n {
            x = ou_step(x, 0.0, theta, sigma, dt, &mut rng);
            acc += x * x;
        }
        let measured = acc / n as f64;
        let expected = sigma * sigma / (2.0 * theta);
        assert!(
            libm::fabs(measured - expected) / expected < 0.1,
            "variance {measured} vs {expected}"
        );
    }
}
