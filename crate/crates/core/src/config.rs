//! Run configuration for every stage of the pipeline.
//!
//! All tunables live here so that a run is reproducible from a single
//! [`RunConfig`] plus a seed. Defaults follow the baseline transonic setup:
//! NACA0012, Mach 0.85 at zero incidence, 132 boundary sample points, a
//! far-field radius of 35 chords, and the TD3 schedule of 75 epochs of 8
//! steps after 4 warmup episodes of 64 random steps.

use alloc::vec::Vec;

/// Numerical flux used on interior and boundary edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxScheme {
    /// Local Lax-Friedrichs; the default, with an analytic frozen-wave-speed
    /// Jacobian.
    Rusanov,
    /// Three-wave HLLC; Jacobian blocks are formed by per-edge finite
    /// differences.
    Hllc,
}

/// Output functional for solves and adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    Drag,
    Lift,
    /// Lift over drag.
    Ratio,
}

/// What the environment minimizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveKind {
    /// Corrected drag coefficient from the adaptive solve pipeline.
    Drag,
    /// Negated lift-to-drag ratio, so that lower is better uniformly.
    NegativeLiftDragRatio,
    /// Quadratic proxy in fitted control-point space; exact minimum is known
    /// analytically, which makes it suitable for fast optimizer tests.
    Surrogate(SurrogateSpec),
}

/// Quadratic surrogate objective
/// `D = c0 + weight * sum_i ||cp_i - cp*_i||^2`
/// where `cp*` are the control points of the initial shape with y scaled by
/// `thin_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateSpec {
    pub c0: f64,
    pub weight: f64,
    pub thin_scale: f64,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        SurrogateSpec { c0: 0.02, weight: 1.0, thin_scale: 0.75 }
    }
}

/// Reward shaping mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardMode {
    /// `R_t = D_{t-1} - D_t`; cumulative reward telescopes to `D_0 - D_T`.
    Simple,
    /// Adds the decaying distance-to-baseline term
    /// `lambda0 * decay^t * (D_0 - D_t)`.
    Generalized,
}

/// Geometry parameterization and deformation limits.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    /// Total number of boundary sample points, split evenly between the upper
    /// and lower surfaces (endpoints shared).
    pub n_points: usize,
    /// NACA 4-digit thickness ratio of the initial shape.
    pub thickness: f64,
    /// Bezier degree per surface.
    pub degree: usize,
    /// Second-difference regularization weight for the fit used inside the
    /// deformation pipeline.
    pub lambda_s: f64,
    /// Width of the Gaussian action bump.
    pub delta_min: f64,
    pub delta_max: f64,
    /// Bound on |y displacement| per action.
    pub max_step: f64,
    /// Thickness floor and the chordwise intervals it applies to.
    pub min_thickness: f64,
    pub constraint_ranges: Vec<(f64, f64)>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            n_points: 132,
            thickness: 0.12,
            degree: 16,
            // Large enough to keep the fitted control polygon monotone in x
            // (unregularized high-degree fits oscillate wildly), small enough
            // for sub-0.2% chord fidelity at the samples.
            lambda_s: 3e-4,
            delta_min: 0.2,
            delta_max: 0.8,
            max_step: 0.005,
            min_thickness: 0.01,
            // The floor cannot extend into the sharp leading/trailing edge
            // neighborhoods where any airfoil's thickness tends to zero.
            constraint_ranges: alloc::vec![(0.01, 0.1), (0.7, 0.97)],
        }
    }
}

/// O-mesh generation and deformation maintenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    /// Far-field circle radius in chords, centered at mid-chord (0.5, 0).
    pub radius: f64,
    /// Number of radial cell layers between the airfoil and the far field.
    pub n_layers: usize,
    /// Jacobi smoothing sweeps applied to level-1/level-2 vertices after each
    /// deformation.
    pub smooth_sweeps: usize,
    /// Turning-angle threshold (radians) for curvature-driven refinement.
    pub kappa_tol: f64,
    /// Minimum triangle angle (degrees) below which a deformed mesh is
    /// rejected as invalid.
    pub min_angle_floor: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            radius: 35.0,
            n_layers: 56,
            smooth_sweeps: 3,
            kappa_tol: 0.1,
            min_angle_floor: 10.0,
        }
    }
}

/// Free-stream definition in the nondimensionalization rho = 1, sound speed
/// = 1 (so |V| = Mach) and p = 1/gamma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub mach: f64,
    pub alpha_deg: f64,
    pub gamma: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { mach: 0.85, alpha_deg: 0.0, gamma: 1.4 }
    }
}

/// Newton/pseudo-transient continuation and the inner linear solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub flux: FluxScheme,
    /// Max-norm tolerance on the flux-balance residual.
    pub residual_tol: f64,
    pub max_newton_iters: usize,
    pub cfl0: f64,
    pub cfl_growth: f64,
    pub cfl_cut: f64,
    pub cfl_max: f64,
    /// Relative tolerance for the inner GMRES solve.
    pub lin_tol: f64,
    pub gmres_restart: usize,
    pub gmres_max_restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            flux: FluxScheme::Rusanov,
            residual_tol: 1e-3,
            max_newton_iters: 200,
            cfl0: 10.0,
            cfl_growth: 2.0,
            cfl_cut: 2.0,
            cfl_max: 1e12,
            lin_tol: 1e-4,
            gmres_restart: 50,
            gmres_max_restarts: 40,
        }
    }
}

/// Dual-weighted-residual adaptation loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DwrConfig {
    pub functional: Functional,
    /// Number of adaptation cycles.
    pub adapt_steps: usize,
    /// Spread multiplier k in `TOL = exp(mean + k * std)` of log indicators.
    pub tol_k: f64,
    /// Relative tolerance for the adjoint linear solve.
    pub adjoint_tol: f64,
    /// Newton budget for the reference solve on the uniformly refined mesh.
    /// This solve only validates the correction, so the cap is small; the
    /// correction itself uses the injected coarse solution.
    pub fine_newton_iters: usize,
    /// Hard cap on coarse-mesh cells; marking stops refining past this.
    pub max_cells: usize,
}

impl Default for DwrConfig {
    fn default() -> Self {
        DwrConfig {
            functional: Functional::Drag,
            adapt_steps: 2,
            tol_k: 1.0,
            adjoint_tol: 1e-8,
            fine_newton_iters: 5,
            max_cells: 50_000,
        }
    }
}

/// Replay buffer sampling fractions. Remaining probability mass is uniform
/// random over what the recent/best pools did not already take.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayFractions {
    pub recent: f64,
    pub best: f64,
}

/// TD3 agent and training schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct RlConfig {
    pub reward_mode: RewardMode,
    pub lambda0: f64,
    pub reward_decay: f64,
    /// Reward assigned to infeasible or non-convergent actions.
    pub penalty: f64,
    /// Below this reward the opposite action is tried.
    pub min_reward: f64,
    /// Above this reward a similar action is queued for the next step.
    pub good_reward: f64,
    /// Episode resets when the cumulative reward drops below this.
    pub min_cum_reward: f64,

    pub gamma: f64,
    /// Soft-update weight on the *target* parameters.
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub delay_step: usize,

    pub batch_small: usize,
    pub batch_large: usize,
    /// Buffer size at which the batch switches from small to large.
    pub batch_switch: usize,
    pub replay_capacity: usize,
    pub fractions: ReplayFractions,

    pub epsilon0: f64,
    pub epsilon_decay: f64,
    /// Epochs between exploration decays.
    pub decay_every: usize,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    pub ou_dt: f64,

    pub warmup_episodes: usize,
    pub warmup_steps: usize,
    pub epochs: usize,
    pub steps_per_epoch: usize,

    /// Discrete action-type head width. The deformation bump is the only
    /// type implemented, but the head stays configurable.
    pub action_types: usize,
    /// Hidden width of the dense trunks.
    pub hidden: usize,
    /// Shared projection width for the attention streams.
    pub attn_dim: usize,
}

impl Default for RlConfig {
    fn default() -> Self {
        RlConfig {
            reward_mode: RewardMode::Simple,
            lambda0: 0.2,
            reward_decay: 0.9,
            penalty: -1e-3,
            min_reward: 0.0,
            good_reward: 1e-4,
            min_cum_reward: -0.05,
            gamma: 0.99,
            tau: 0.995,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            delay_step: 2,
            batch_small: 64,
            batch_large: 256,
            batch_switch: 1024,
            replay_capacity: 100_000,
            fractions: ReplayFractions { recent: 0.25, best: 0.25 },
            epsilon0: 0.9,
            epsilon_decay: 0.85,
            decay_every: 3,
            ou_theta: 0.15,
            ou_sigma: 0.2,
            ou_dt: 1.0,
            warmup_episodes: 4,
            warmup_steps: 64,
            epochs: 75,
            steps_per_epoch: 8,
            action_types: 1,
            hidden: 256,
            attn_dim: 128,
        }
    }
}

/// Everything a run needs besides output paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub objective: ObjectiveKind,
    pub flow: FlowConfig,
    pub geometry: GeometryConfig,
    pub mesh: MeshConfig,
    pub solver: SolverConfig,
    pub dwr: DwrConfig,
    pub rl: RlConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            objective: ObjectiveKind::Drag,
            flow: FlowConfig::default(),
            geometry: GeometryConfig::default(),
            mesh: MeshConfig::default(),
            solver: SolverConfig::default(),
            dwr: DwrConfig::default(),
            rl: RlConfig::default(),
        }
    }
}
