//! The shape-optimization environment.
//!
//! A step takes a bump action through the full geometry pipeline: displace
//! the sample points, check the thickness floor, refit the surface curves,
//! resample the canonical boundary points, carry the O-mesh along, and
//! evaluate the objective. Any failure along the way rejects the action:
//! the state is returned unchanged and the reward is the configured penalty,
//! so a broken mesh or a diverged solve can never leak into the episode.

use alloc::vec::Vec;

use crate::adjoint::dwr_adapt_loop;
use crate::config::{ObjectiveKind, RunConfig, SurrogateSpec};
use crate::error::Result;
use crate::euler::FreeStream;
use crate::geom::{apply_action, check_thickness, naca4_init, AirfoilShape, DeformAction, Point2};
use crate::mesh::{
    generate_omesh, laplacian_smooth, level_smoothing_mask, repair_boundary_triangles,
    update_boundary, SurfaceCurves, UnstructuredMesh,
};
use crate::rl::reward::compute_reward;

/// Why a step was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// The deformed shape violates the minimum-thickness windows.
    Thickness,
    /// The curve fit or resampling failed on the deformed samples.
    Geometry,
    /// The carried mesh kept inverted triangles after repair and smoothing,
    /// or its minimum angle fell below the configured floor.
    Mesh,
    /// The flow solve did not converge.
    Solver,
}

/// Step outcome metadata alongside the reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInfo {
    /// The action was executed and the state advanced.
    pub accepted: bool,
    pub rejection: Option<Rejection>,
}

impl StepInfo {
    fn ok() -> Self {
        StepInfo { accepted: true, rejection: None }
    }

    fn rejected(r: Rejection) -> Self {
        StepInfo { accepted: false, rejection: Some(r) }
    }
}

/// Full environment state at one step.
#[derive(Debug, Clone)]
pub struct EnvState {
    /// Canonical boundary samples of the current shape.
    pub shape: AirfoilShape,
    /// Regularized fit of `shape`; the reduced representation the networks
    /// consume.
    pub curves: SurfaceCurves,
    /// The deformation-maintained O-mesh.
    pub mesh: UnstructuredMesh,
    /// Current objective value.
    pub d: f64,
    /// Baseline objective of the episode.
    pub d0: f64,
    /// Step index, 0 at reset.
    pub t: usize,
}

/// The environment; immutable during an episode.
pub struct Env {
    cfg: RunConfig,
    fs: FreeStream,
    /// Control-point targets of the surrogate objective, upper then lower.
    surrogate_target: Vec<Point2>,
    /// Steps after which an episode reports done; the trainer adjusts this
    /// between the warmup and main phases.
    pub max_episode_steps: usize,
}

/// Flattened control-point coordinates of both curves, upper then lower;
/// the state encoding every network input uses.
pub fn state_vector(curves: &SurfaceCurves) -> Vec<f64> {
    let mut v = Vec::with_capacity(4 * (curves.upper.control_points().len()));
    for p in curves.upper.control_points().iter().chain(curves.lower.control_points()) {
        v.push(p.x);
        v.push(p.y);
    }
    v
}

/// Token width of one surface in the encoding of [`state_vector`].
pub fn token_dim(degree: usize) -> usize {
    2 * (degree + 1)
}

fn surrogate_value(spec: &SurrogateSpec, curves: &SurfaceCurves, target: &[Point2]) -> f64 {
    let mut sum = 0.0;
    for (p, t) in curves
        .upper
        .control_points()
        .iter()
        .chain(curves.lower.control_points())
        .zip(target)
    {
        let (dx, dy) = (p.x - t.x, p.y - t.y);
        sum += dx * dx + dy * dy;
    }
    spec.c0 + spec.weight * sum
}

/// Evaluates both curves at the chordwise stations of `reference`, keeping
/// the sample stations canonical across deformations.
fn resample(curves: &SurfaceCurves, reference: &AirfoilShape) -> Result<AirfoilShape> {
    let on_curve = |curve: &crate::geom::BezierCurve, pts: &[Point2]| -> Result<Vec<Point2>> {
        pts.iter()
            .map(|p| {
                let t = curve.inverse_param(p.x)?;
                curve.point(t)
            })
            .collect()
    };
    AirfoilShape::new(on_curve(&curves.upper, reference.upper())?, on_curve(&curves.lower, reference.lower())?)
}

impl Env {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        let fs = FreeStream::new(&cfg.flow);
        let shape = naca4_init(cfg.geometry.thickness, cfg.geometry.n_points)?;
        let curves = SurfaceCurves::fit(&shape, cfg.geometry.degree, cfg.geometry.lambda_s)?;
        let thin = match cfg.objective {
            ObjectiveKind::Surrogate(s) => s.thin_scale,
            _ => 1.0,
        };
        let surrogate_target: Vec<Point2> = curves
            .upper
            .control_points()
            .iter()
            .chain(curves.lower.control_points())
            .map(|p| Point2 { x: p.x, y: p.y * thin })
            .collect();
        let max_episode_steps = cfg.rl.epochs * cfg.rl.steps_per_epoch;
        Ok(Env { cfg, fs, surrogate_target, max_episode_steps })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    /// The objective on an arbitrary (mesh, curves) pair.
    pub fn evaluate_objective(
        &self,
        mesh: &UnstructuredMesh,
        curves: &SurfaceCurves,
    ) -> Result<f64> {
        match &self.cfg.objective {
            ObjectiveKind::Surrogate(spec) => {
                Ok(surrogate_value(spec, curves, &self.surrogate_target))
            }
            ObjectiveKind::Drag => {
                let out =
                    dwr_adapt_loop(mesh, Some(curves), &self.fs, &self.cfg.solver, &self.cfg.dwr)?;
                Ok(out.corrected)
            }
            ObjectiveKind::NegativeLiftDragRatio => {
                let out =
                    dwr_adapt_loop(mesh, Some(curves), &self.fs, &self.cfg.solver, &self.cfg.dwr)?;
                Ok(-out.corrected)
            }
        }
    }

    /// Fresh baseline state: initial shape, fresh O-mesh, objective solved.
    pub fn reset(&self) -> Result<EnvState> {
        let geo = &self.cfg.geometry;
        let shape = naca4_init(geo.thickness, geo.n_points)?;
        let curves = SurfaceCurves::fit(&shape, geo.degree, geo.lambda_s)?;
        let mesh = generate_omesh(&shape, &self.cfg.mesh)?;
        let d0 = self.evaluate_objective(&mesh, &curves)?;
        Ok(EnvState { shape, curves, mesh, d: d0, d0, t: 0 })
    }

    /// Executes one action. Infeasible or failed actions return the state
    /// unchanged (time still advances) with the penalty reward.
    pub fn step(&self, state: &EnvState, action: &DeformAction) -> (EnvState, f64, bool, StepInfo) {
        let t_next = state.t + 1;
        let reject = |r: Rejection| {
            let mut s = state.clone();
            s.t = t_next;
            let done = t_next >= self.max_episode_steps;
            (s, self.cfg.rl.penalty, done, StepInfo::rejected(r))
        };

        // A no-op action short-circuits the pipeline so that "unchanged"
        // is exact rather than up to refit drift.
        if action.y_upper == 0.0 && action.y_lower == 0.0 {
            let mut s = state.clone();
            s.t = t_next;
            let reward = compute_reward(&self.cfg.rl, state.d, state.d, state.d0, t_next);
            let done = t_next >= self.max_episode_steps;
            return (s, reward, done, StepInfo::ok());
        }

        let deformed = match apply_action(&state.shape, action) {
            Ok(s) => s,
            Err(_) => return reject(Rejection::Geometry),
        };
        let report = check_thickness(
            &deformed,
            self.cfg.geometry.min_thickness,
            &self.cfg.geometry.constraint_ranges,
        );
        if !report.pass {
            return reject(Rejection::Thickness);
        }

        let curves =
            match SurfaceCurves::fit(&deformed, self.cfg.geometry.degree, self.cfg.geometry.lambda_s)
            {
                Ok(c) => c,
                Err(_) => return reject(Rejection::Geometry),
            };
        let shape = match resample(&curves, &deformed) {
            Ok(s) => s,
            Err(_) => return reject(Rejection::Geometry),
        };

        let mut mesh = state.mesh.clone();
        if update_boundary(&mut mesh, &curves).is_err() {
            return reject(Rejection::Geometry);
        }
        repair_boundary_triangles(&mut mesh);
        let movable = level_smoothing_mask(&mesh);
        laplacian_smooth(&mut mesh, self.cfg.mesh.smooth_sweeps, &movable);
        if !mesh.inverted_triangles().is_empty() {
            return reject(Rejection::Mesh);
        }
        // The angle gate is relative: a mesh that already sits below the
        // floor (coarse meshes do) stays usable, but no action may push the
        // minimum angle below both the floor and its previous value.
        let min_angle = mesh.quality_metrics().min_angle_deg;
        if min_angle < self.cfg.mesh.min_angle_floor
            && min_angle < state.mesh.quality_metrics().min_angle_deg
        {
            return reject(Rejection::Mesh);
        }

        let d = match self.evaluate_objective(&mesh, &curves) {
            Ok(d) if d.is_finite() => d,
            _ => return reject(Rejection::Solver),
        };

        let reward = compute_reward(&self.cfg.rl, state.d, d, state.d0, t_next);
        let next = EnvState { shape, curves, mesh, d, d0: state.d0, t: t_next };
        let done = t_next >= self.max_episode_steps;
        (next, reward, done, StepInfo::ok())
    }
}
