//! Numerical fluxes across edges, their Jacobians, and the slip-wall
//! mirror construction.
//!
//! The Rusanov flux carries an analytic Jacobian in which the maximal wave
//! speed is treated as a constant of the edge; differentiating the assembled
//! residual therefore only matches finite differences of the residual
//! evaluated with those wave speeds frozen at the base state. HLLC has no
//! such closed form here and is differentiated edge-by-edge numerically.

use super::state::{flux_dot_n, pressure, sound_speed, velocity, State};
use crate::config::FluxScheme;
use crate::geom::Point2;
use crate::sparse::{block_mul, Block4};

/// Maximal signal speed `|v . n| + c` over both edge states.
pub fn edge_wave_speed(ul: &State, ur: &State, gamma: f64, n: Point2) -> f64 {
    let side = |u: &State| {
        let (ux, uy) = velocity(u);
        libm::fabs(ux * n.x + uy * n.y) + sound_speed(u, gamma)
    };
    let a = side(ul);
    let b = side(ur);
    if a > b {
        a
    } else {
        b
    }
}

/// Rusanov flux with an externally supplied wave speed.
pub fn rusanov_flux_frozen(
    ul: &State,
    ur: &State,
    gamma: f64,
    n: Point2,
    lambda: f64,
) -> State {
    let fl = flux_dot_n(ul, gamma, n);
    let fr = flux_dot_n(ur, gamma, n);
    let mut h = [0.0; 4];
    for k in 0..4 {
        h[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * lambda * (ur[k] - ul[k]);
    }
    h
}

/// Rusanov flux with the wave speed taken from the current states.
pub fn rusanov_flux(ul: &State, ur: &State, gamma: f64, n: Point2) -> State {
    rusanov_flux_frozen(ul, ur, gamma, n, edge_wave_speed(ul, ur, gamma, n))
}

/// Jacobian of the directed physical flux `F(u) . n` with respect to `u`.
pub fn flux_jacobian(u: &State, gamma: f64, n: Point2) -> Block4 {
    let (ux, uy) = velocity(u);
    let q2 = ux * ux + uy * uy;
    let vn = ux * n.x + uy * n.y;
    let g1 = gamma - 1.0;
    // Total specific enthalpy.
    let ht = (u[3] + pressure(u, gamma)) / u[0];
    [
        [0.0, n.x, n.y, 0.0],
        [
            -ux * vn + 0.5 * g1 * q2 * n.x,
            vn + (2.0 - gamma) * ux * n.x,
            ux * n.y - g1 * uy * n.x,
            g1 * n.x,
        ],
        [
            -uy * vn + 0.5 * g1 * q2 * n.y,
            uy * n.x - g1 * ux * n.y,
            vn + (2.0 - gamma) * uy * n.y,
            g1 * n.y,
        ],
        [
            vn * (0.5 * g1 * q2 - ht),
            ht * n.x - g1 * ux * vn,
            ht * n.y - g1 * uy * vn,
            gamma * vn,
        ],
    ]
}

/// Left and right Jacobians of the Rusanov flux with the wave speed frozen.
pub fn rusanov_jacobians_frozen(
    ul: &State,
    ur: &State,
    gamma: f64,
    n: Point2,
    lambda: f64,
) -> (Block4, Block4) {
    let mut jl = flux_jacobian(ul, gamma, n);
    let mut jr = flux_jacobian(ur, gamma, n);
    for r in 0..4 {
        for c in 0..4 {
            jl[r][c] *= 0.5;
            jr[r][c] *= 0.5;
        }
        jl[r][r] += 0.5 * lambda;
        jr[r][r] -= 0.5 * lambda;
    }
    (jl, jr)
}

/// HLLC flux with Davis wave-speed estimates.
pub fn hllc_flux(ul: &State, ur: &State, gamma: f64, n: Point2) -> State {
    let (uxl, uyl) = velocity(ul);
    let (uxr, uyr) = velocity(ur);
    let vnl = uxl * n.x + uyl * n.y;
    let vnr = uxr * n.x + uyr * n.y;
    let pl = pressure(ul, gamma);
    let pr = pressure(ur, gamma);
    let cmax = sound_speed(ul, gamma).max(sound_speed(ur, gamma));
    let sl = vnl.min(vnr) - cmax;
    let sr = vnl.max(vnr) + cmax;
    if sl >= 0.0 {
        return flux_dot_n(ul, gamma, n);
    }
    if sr <= 0.0 {
        return flux_dot_n(ur, gamma, n);
    }
    // Contact speed; the denominator is strictly negative because
    // sl < vnl and sr > vnr.
    let sstar = (pr - pl + ul[0] * vnl * (sl - vnl) - ur[0] * vnr * (sr - vnr))
        / (ul[0] * (sl - vnl) - ur[0] * (sr - vnr));
    let star = |u: &State, s: f64, vn: f64, p: f64, ux: f64, uy: f64| -> State {
        let fac = u[0] * (s - vn) / (s - sstar);
        [
            fac,
            fac * (ux + (sstar - vn) * n.x),
            fac * (uy + (sstar - vn) * n.y),
            fac * (u[3] / u[0] + (sstar - vn) * (sstar + p / (u[0] * (s - vn)))),
        ]
    };
    if sstar >= 0.0 {
        let us = star(ul, sl, vnl, pl, uxl, uyl);
        let f = flux_dot_n(ul, gamma, n);
        [
            f[0] + sl * (us[0] - ul[0]),
            f[1] + sl * (us[1] - ul[1]),
            f[2] + sl * (us[2] - ul[2]),
            f[3] + sl * (us[3] - ul[3]),
        ]
    } else {
        let us = star(ur, sr, vnr, pr, uxr, uyr);
        let f = flux_dot_n(ur, gamma, n);
        [
            f[0] + sr * (us[0] - ur[0]),
            f[1] + sr * (us[1] - ur[1]),
            f[2] + sr * (us[2] - ur[2]),
            f[3] + sr * (us[3] - ur[3]),
        ]
    }
}

/// Numerical edge flux for the configured scheme.
pub fn numerical_flux(scheme: FluxScheme, ul: &State, ur: &State, gamma: f64, n: Point2) -> State {
    match scheme {
        FluxScheme::Rusanov => rusanov_flux(ul, ur, gamma, n),
        FluxScheme::Hllc => hllc_flux(ul, ur, gamma, n),
    }
}

/// Ghost state for a slip wall: density and energy are kept, the momentum
/// is reflected about the wall plane. `n` must be a unit vector.
pub fn mirror_state(u: &State, n: Point2) -> State {
    let mn = u[1] * n.x + u[2] * n.y;
    [u[0], u[1] - 2.0 * mn * n.x, u[2] - 2.0 * mn * n.y, u[3]]
}

/// Matrix form of [`mirror_state`]; the map is linear in `u`.
pub fn mirror_matrix(n: Point2) -> Block4 {
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0 - 2.0 * n.x * n.x, -2.0 * n.x * n.y, 0.0],
        [0.0, -2.0 * n.x * n.y, 1.0 - 2.0 * n.y * n.y, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

/// Edge flux against the mirrored ghost state. Its mass and energy
/// components vanish identically, so a slip wall neither leaks mass nor
/// does work on the flow.
pub fn wall_flux(scheme: FluxScheme, u: &State, gamma: f64, n: Point2) -> State {
    numerical_flux(scheme, u, &mirror_state(u, n), gamma, n)
}

fn fd_step(component: f64) -> f64 {
    1e-7 * libm::fabs(component).max(1.0)
}

/// Central finite differences of an arbitrary state-to-state map.
fn fd_jacobian(f: impl Fn(&State) -> State, u: &State) -> Block4 {
    let mut j = [[0.0; 4]; 4];
    for k in 0..4 {
        let eps = fd_step(u[k]);
        let mut up = *u;
        let mut um = *u;
        up[k] += eps;
        um[k] -= eps;
        let fp = f(&up);
        let fm = f(&um);
        for r in 0..4 {
            j[r][k] = (fp[r] - fm[r]) / (2.0 * eps);
        }
    }
    j
}

/// Jacobians of the interior edge flux with respect to both sides.
///
/// Rusanov uses the analytic frozen-wave-speed form; HLLC is differenced
/// numerically per edge.
pub fn interior_flux_jacobians(
    scheme: FluxScheme,
    ul: &State,
    ur: &State,
    gamma: f64,
    n: Point2,
) -> (Block4, Block4) {
    match scheme {
        FluxScheme::Rusanov => {
            let lambda = edge_wave_speed(ul, ur, gamma, n);
            rusanov_jacobians_frozen(ul, ur, gamma, n, lambda)
        }
        FluxScheme::Hllc => (
            fd_jacobian(|x| hllc_flux(x, ur, gamma, n), ul),
            fd_jacobian(|x| hllc_flux(ul, x, gamma, n), ur),
        ),
    }
}

/// Jacobian of the wall flux with respect to the single interior state,
/// including the dependence through the mirror.
pub fn wall_flux_jacobian(scheme: FluxScheme, u: &State, gamma: f64, n: Point2) -> Block4 {
    match scheme {
        FluxScheme::Rusanov => {
            let ghost = mirror_state(u, n);
            let lambda = edge_wave_speed(u, &ghost, gamma, n);
            let (jl, jr) = rusanov_jacobians_frozen(u, &ghost, gamma, n, lambda);
            let chained = block_mul(&jr, &mirror_matrix(n));
            let mut j = jl;
            for r in 0..4 {
                for c in 0..4 {
                    j[r][c] += chained[r][c];
                }
            }
            j
        }
        FluxScheme::Hllc => fd_jacobian(|x| wall_flux(scheme, x, gamma, n), u),
    }
}

/// Jacobian of the far-field flux with respect to the interior state; the
/// outer state is held at the free stream.
pub fn farfield_flux_jacobian(
    scheme: FluxScheme,
    u: &State,
    freestream: &State,
    gamma: f64,
    n: Point2,
) -> Block4 {
    match scheme {
        FluxScheme::Rusanov => {
            let lambda = edge_wave_speed(u, freestream, gamma, n);
            rusanov_jacobians_frozen(u, freestream, gamma, n, lambda).0
        }
        FluxScheme::Hllc => fd_jacobian(|x| hllc_flux(x, freestream, gamma, n), u),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;
    use rand::SeedableRng;

    const GAMMA: f64 = 1.4;

    fn random_state(rng: &mut ChaCha8Rng) -> State {
        let rho = rng.random_range(0.5..2.0);
        let ux = rng.random_range(-0.9..0.9);
        let uy = rng.random_range(-0.9..0.9);
        let p = rng.random_range(0.5..2.0);
        [
            rho,
            rho * ux,
            rho * uy,
            p / (GAMMA - 1.0) + 0.5 * rho * (ux * ux + uy * uy),
        ]
    }

    fn random_normal(rng: &mut ChaCha8Rng) -> Point2 {
        let t = rng.random_range(0.0..core::f64::consts::TAU);
        Point2 { x: t.cos(), y: t.sin() }
    }

    fn max_abs(b: &Block4) -> f64 {
        b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn assert_blocks_close(a: &Block4, b: &Block4, tol: f64) {
        let scale = max_abs(a).max(1.0);
        for r in 0..4 {
            for c in 0..4 {
                assert!(
                    (a[r][c] - b[r][c]).abs() <= tol * scale,
                    "entry ({r},{c}): {} vs {}",
                    a[r][c],
                    b[r][c]
                );
            }
        }
    }

    #[test]
    fn physical_flux_jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let u = random_state(&mut rng);
            let n = random_normal(&mut rng);
            let analytic = flux_jacobian(&u, GAMMA, n);
            let fd = super::fd_jacobian(|x| flux_dot_n(x, GAMMA, n), &u);
            assert_blocks_close(&analytic, &fd, 1e-6);
        }
    }

    #[test]
    fn frozen_rusanov_jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..25 {
            let ul = random_state(&mut rng);
            let ur = random_state(&mut rng);
            let n = random_normal(&mut rng);
            let lambda = edge_wave_speed(&ul, &ur, GAMMA, n);
            let (jl, jr) = rusanov_jacobians_frozen(&ul, &ur, GAMMA, n, lambda);
            let fl = super::fd_jacobian(|x| rusanov_flux_frozen(x, &ur, GAMMA, n, lambda), &ul);
            let fr = super::fd_jacobian(|x| rusanov_flux_frozen(&ul, x, GAMMA, n, lambda), &ur);
            assert_blocks_close(&jl, &fl, 1e-6);
            assert_blocks_close(&jr, &fr, 1e-6);
        }
    }

    #[test]
    fn both_fluxes_are_consistent_with_the_physical_flux() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let u = random_state(&mut rng);
            let n = random_normal(&mut rng);
            let exact = flux_dot_n(&u, GAMMA, n);
            for scheme in [FluxScheme::Rusanov, FluxScheme::Hllc] {
                let h = numerical_flux(scheme, &u, &u, GAMMA, n);
                for k in 0..4 {
                    assert_relative_eq!(h[k], exact[k], max_relative = 1e-12, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn both_fluxes_are_conservative_across_the_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..10 {
            let ul = random_state(&mut rng);
            let ur = random_state(&mut rng);
            let n = random_normal(&mut rng);
            let flipped = Point2 { x: -n.x, y: -n.y };
            for scheme in [FluxScheme::Rusanov, FluxScheme::Hllc] {
                let fwd = numerical_flux(scheme, &ul, &ur, GAMMA, n);
                let bwd = numerical_flux(scheme, &ur, &ul, GAMMA, flipped);
                for k in 0..4 {
                    assert_relative_eq!(fwd[k], -bwd[k], max_relative = 1e-12, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn hllc_upwinds_fully_supersonic_edges() {
        // Both states move at Mach 2 along +n, so the full left flux must
        // pass through unchanged.
        let n = Point2 { x: 0.8, y: -0.6 };
        let make = |rho: f64, p: f64| -> State {
            let c = (GAMMA * p / rho).sqrt();
            let (ux, uy) = (2.0 * c * n.x, 2.0 * c * n.y);
            [rho, rho * ux, rho * uy, p / (GAMMA - 1.0) + 0.5 * rho * (ux * ux + uy * uy)]
        };
        let ul = make(1.0, 1.0);
        let ur = make(1.3, 0.7);
        let h = hllc_flux(&ul, &ur, GAMMA, n);
        let exact = flux_dot_n(&ul, GAMMA, n);
        for k in 0..4 {
            assert_relative_eq!(h[k], exact[k], max_relative = 1e-13, epsilon = 1e-13);
        }
    }

    #[test]
    fn wall_flux_carries_no_mass_or_energy_for_any_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let u = random_state(&mut rng);
            let n = random_normal(&mut rng);
            for scheme in [FluxScheme::Rusanov, FluxScheme::Hllc] {
                let h = wall_flux(scheme, &u, GAMMA, n);
                assert!(h[0].abs() < 1e-13, "mass leak {}", h[0]);
                assert!(h[3].abs() < 1e-13, "energy leak {}", h[3]);
            }
        }
    }

    #[test]
    fn wall_flux_reduces_to_pressure_times_normal_for_tangent_flow() {
        let n = Point2 { x: 0.6, y: 0.8 };
        let t = Point2 { x: -n.y, y: n.x };
        let (rho, speed, p) = (1.2, 0.7, 0.9);
        let u: State = [
            rho,
            rho * speed * t.x,
            rho * speed * t.y,
            p / (GAMMA - 1.0) + 0.5 * rho * speed * speed,
        ];
        for scheme in [FluxScheme::Rusanov, FluxScheme::Hllc] {
            let h = wall_flux(scheme, &u, GAMMA, n);
            assert_relative_eq!(h[1], p * n.x, max_relative = 1e-12);
            assert_relative_eq!(h[2], p * n.y, max_relative = 1e-12);
        }
    }

    #[test]
    fn mirror_matrix_agrees_with_the_map_and_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..10 {
            let u = random_state(&mut rng);
            let n = random_normal(&mut rng);
            let m = mirror_matrix(n);
            let direct = mirror_state(&u, n);
            let mut via_matrix = [0.0; 4];
            for r in 0..4 {
                for c in 0..4 {
                    via_matrix[r] += m[r][c] * u[c];
                }
            }
            let twice = mirror_state(&direct, n);
            for k in 0..4 {
                assert_relative_eq!(via_matrix[k], direct[k], max_relative = 1e-14, epsilon = 1e-14);
                assert_relative_eq!(twice[k], u[k], max_relative = 1e-13, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn wall_jacobian_matches_finite_differences_of_the_composed_flux() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..15 {
            let u = random_state(&mut rng);
            let n = random_normal(&mut rng);
            let ghost = mirror_state(&u, n);
            let lambda = edge_wave_speed(&u, &ghost, GAMMA, n);
            let analytic = wall_flux_jacobian(FluxScheme::Rusanov, &u, GAMMA, n);
            // Differencing must freeze the wave speed to isolate the
            // analytic convention.
            let fd = super::fd_jacobian(
                |x| rusanov_flux_frozen(x, &mirror_state(x, n), GAMMA, n, lambda),
                &u,
            );
            assert_blocks_close(&analytic, &fd, 1e-6);
        }
    }

    #[test]
    fn farfield_jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let far = random_state(&mut rng);
        for _ in 0..15 {
            let u = random_state(&mut rng);
            let n = random_normal(&mut rng);
            let lambda = edge_wave_speed(&u, &far, GAMMA, n);
            let analytic = farfield_flux_jacobian(FluxScheme::Rusanov, &u, &far, GAMMA, n);
            let fd = super::fd_jacobian(|x| rusanov_flux_frozen(x, &far, GAMMA, n, lambda), &u);
            assert_blocks_close(&analytic, &fd, 1e-6);
        }
    }
}
