//! Conserved state vectors, primitive recovery, and free-stream data.
//!
//! States are nondimensional: the free stream has unit density, unit sound
//! speed, and pressure `1/gamma`, so the velocity magnitude equals the Mach
//! number and the reference length is the chord.

use crate::config::FlowConfig;
use crate::geom::Point2;
use alloc::vec;
use alloc::vec::Vec;

/// Conserved variables per cell: density, both momentum components, and
/// total energy per unit volume.
pub type State = [f64; 4];

/// Number of conserved fields per cell.
pub const N_FIELDS: usize = 4;

/// Static pressure from the conserved state.
pub fn pressure(u: &State, gamma: f64) -> f64 {
    let [rho, mx, my, e] = *u;
    (gamma - 1.0) * (e - 0.5 * (mx * mx + my * my) / rho)
}

/// Speed of sound; meaningful only for physical states.
pub fn sound_speed(u: &State, gamma: f64) -> f64 {
    libm::sqrt(gamma * pressure(u, gamma) / u[0])
}

/// Velocity components.
pub fn velocity(u: &State) -> (f64, f64) {
    (u[1] / u[0], u[2] / u[0])
}

/// A state is physical when density and pressure are strictly positive and
/// every component is finite.
pub fn is_physical(u: &State, gamma: f64) -> bool {
    u.iter().all(|c| c.is_finite()) && u[0] > 0.0 && pressure(u, gamma) > 0.0
}

/// Directed physical flux `F(u) . n`; `n` need not be unit length, the
/// result scales linearly with it.
pub fn flux_dot_n(u: &State, gamma: f64, n: Point2) -> State {
    let [rho, mx, my, e] = *u;
    let (ux, uy) = velocity(u);
    let p = pressure(u, gamma);
    let vn = ux * n.x + uy * n.y;
    [
        rho * vn,
        mx * vn + p * n.x,
        my * vn + p * n.y,
        (e + p) * vn,
    ]
}

/// Gradient of static pressure with respect to the conserved state.
pub fn dp_du(u: &State, gamma: f64) -> State {
    let (ux, uy) = velocity(u);
    let q2 = ux * ux + uy * uy;
    [
        (gamma - 1.0) * 0.5 * q2,
        -(gamma - 1.0) * ux,
        -(gamma - 1.0) * uy,
        gamma - 1.0,
    ]
}

/// Free-stream reference quantities shared by boundary conditions, force
/// coefficients, and initial fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeStream {
    pub gamma: f64,
    pub mach: f64,
    /// Angle of attack in radians.
    pub alpha: f64,
    /// Conserved free-stream state.
    pub state: State,
}

impl FreeStream {
    pub fn new(flow: &FlowConfig) -> FreeStream {
        let alpha = flow.alpha_deg.to_radians();
        let p = 1.0 / flow.gamma;
        let e = p / (flow.gamma - 1.0) + 0.5 * flow.mach * flow.mach;
        FreeStream {
            gamma: flow.gamma,
            mach: flow.mach,
            alpha,
            state: [
                1.0,
                flow.mach * libm::cos(alpha),
                flow.mach * libm::sin(alpha),
                e,
            ],
        }
    }

    /// Free-stream dynamic pressure; the chord is 1, so this is also the
    /// force normalization.
    pub fn dynamic_pressure(&self) -> f64 {
        0.5 * self.mach * self.mach
    }

    /// Unit vector along the free-stream velocity.
    pub fn drag_direction(&self) -> Point2 {
        Point2 { x: libm::cos(self.alpha), y: libm::sin(self.alpha) }
    }

    /// Unit vector normal to the free-stream velocity, positive upward at
    /// zero incidence.
    pub fn lift_direction(&self) -> Point2 {
        Point2 { x: -libm::sin(self.alpha), y: libm::cos(self.alpha) }
    }
}

/// Cell-centered conserved field, stored flat with four entries per cell so
/// it can be passed directly to the linear algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    data: Vec<f64>,
}

impl FlowField {
    /// Every cell set to the same state.
    pub fn uniform(n_cells: usize, state: State) -> FlowField {
        let mut data = vec![0.0; N_FIELDS * n_cells];
        for c in 0..n_cells {
            data[N_FIELDS * c..N_FIELDS * (c + 1)].copy_from_slice(&state);
        }
        FlowField { data }
    }

    /// Wraps an existing flat vector; its length must be a multiple of four.
    pub fn from_raw(data: Vec<f64>) -> FlowField {
        assert!(data.len() % N_FIELDS == 0);
        FlowField { data }
    }

    pub fn n_cells(&self) -> usize {
        self.data.len() / N_FIELDS
    }

    pub fn state(&self, cell: usize) -> State {
        let s = &self.data[N_FIELDS * cell..N_FIELDS * (cell + 1)];
        [s[0], s[1], s[2], s[3]]
    }

    pub fn set_state(&mut self, cell: usize, state: State) {
        self.data[N_FIELDS * cell..N_FIELDS * (cell + 1)].copy_from_slice(&state);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// True when density and pressure are positive in every cell.
    pub fn is_physical(&self, gamma: f64) -> bool {
        (0..self.n_cells()).all(|c| is_physical(&self.state(c), gamma))
    }
}
