//! Pseudo-transient continuation: damped Newton with a local time-step
//! diagonal that is relaxed away as the residual falls.

use super::assemble::{assemble_residual, fill_jacobian, jacobian_matrix, max_norm, EdgeData};
use super::state::{sound_speed, velocity, FlowField, FreeStream};
use crate::config::SolverConfig;
use crate::error::Result;
use crate::sparse::{gmres, BlockIlu0, BsrMatrix, GmresParams};
use alloc::vec;
use alloc::vec::Vec;

/// The CFL number is never driven below this, so a string of rejected
/// steps cannot stall the continuation at a uselessly small time step.
const CFL_FLOOR: f64 = 1e-6;

/// Positivity safeguarding halves the Newton step at most this many times.
const MAX_HALVINGS: usize = 30;

/// One row of the convergence history: the state after a Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub residual_norm: f64,
    pub cfl: f64,
}

/// Outcome of a steady solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    /// Newton iterations actually performed; zero when the initial field
    /// already satisfies the tolerance.
    pub iterations: usize,
    pub converged: bool,
    /// Volume-scaled residual max-norm at exit; this is the quantity the
    /// tolerance applies to.
    pub residual_norm: f64,
    /// Max-norm of the unscaled flux balance at exit.
    pub raw_residual_norm: f64,
    pub initial_norm: f64,
    pub final_cfl: f64,
    /// Total inner GMRES iterations across all Newton steps.
    pub linear_iterations: usize,
    /// Per-iteration residual norms and CFL numbers, rejected steps included.
    pub history: Vec<IterationRecord>,
}

/// Convergence measure: the largest entry of `R_i / V_i`, the rate of
/// change of a cell average under forward Euler. The raw flux balance
/// scales with edge length, so its max-norm says more about the smallest
/// cells than about how steady the flow is.
fn scaled_norm(r: &[f64], volumes: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for (c, v) in volumes.iter().enumerate() {
        for k in 0..super::state::N_FIELDS {
            m = m.max(libm::fabs(r[super::state::N_FIELDS * c + k]) / v);
        }
    }
    m
}

/// Per-cell diagonal `V_i / dt_i` with `dt_i = cfl * h_i / (|v_i| + c_i)`.
fn time_step_shift(ed: &EdgeData, field: &FlowField, gamma: f64, cfl: f64) -> Vec<f64> {
    (0..ed.n_cells)
        .map(|c| {
            let u = field.state(c);
            let (ux, uy) = velocity(&u);
            let speed = libm::sqrt(ux * ux + uy * uy) + sound_speed(&u, gamma);
            ed.volumes[c] * speed / (cfl * ed.sizes[c])
        })
        .collect()
}

/// Drives the volume-scaled flux balance below `cfg.residual_tol` in the
/// max-norm.
///
/// Returns statistics rather than an error when the iteration budget runs
/// out; the caller decides whether a partially converged field is usable.
/// The field is updated in place and is physical on return.
pub fn solve_steady(
    ed: &EdgeData,
    field: &mut FlowField,
    fs: &FreeStream,
    cfg: &SolverConfig,
) -> Result<SolveStats> {
    let mut residual = assemble_residual(ed, field, fs, cfg.flux);
    let mut norm = scaled_norm(&residual, &ed.volumes);
    let mut stats = SolveStats {
        iterations: 0,
        converged: norm <= cfg.residual_tol,
        residual_norm: norm,
        raw_residual_norm: max_norm(&residual),
        initial_norm: norm,
        final_cfl: cfg.cfl0,
        linear_iterations: 0,
        history: Vec::new(),
    };
    if stats.converged {
        return Ok(stats);
    }

    let n = a_dim(ed);
    let mut a: BsrMatrix = jacobian_matrix(ed)?;
    let params = GmresParams {
        restart: cfg.gmres_restart,
        max_restarts: cfg.gmres_max_restarts,
        tol: cfg.lin_tol,
    };
    let zeros = vec![0.0; n];
    let mut cfl = cfg.cfl0;

    for iter in 1..=cfg.max_newton_iters {
        stats.iterations = iter;
        stats.final_cfl = cfl;

        fill_jacobian(ed, field, fs, cfg.flux, &mut a)?;
        a.add_scalar_diagonal(&time_step_shift(ed, field, fs.gamma, cfl))?;

        // A singular pivot means the shifted system is still too stiff;
        // retreat in pseudo-time instead of giving up.
        let Ok(ilu) = BlockIlu0::factor(&a) else {
            cfl = (cfl / cfg.cfl_cut).max(CFL_FLOOR);
            stats.history.push(IterationRecord { iter, residual_norm: norm, cfl });
            continue;
        };
        let rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
        let (dx, info) = gmres(&a, Some(&ilu), &rhs, &zeros, &params)?;
        stats.linear_iterations += info.iterations;

        // Halve the update until density and pressure stay positive.
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = field.clone();
            for (v, d) in trial.as_mut_slice().iter_mut().zip(&dx) {
                *v += alpha * d;
            }
            if trial.is_physical(fs.gamma) {
                accepted = Some(trial);
                break;
            }
            alpha *= 0.5;
        }
        let Some(trial) = accepted else {
            cfl = (cfl / cfg.cfl_cut).max(CFL_FLOOR);
            stats.history.push(IterationRecord { iter, residual_norm: norm, cfl });
            continue;
        };

        let trial_residual = assemble_residual(ed, &trial, fs, cfg.flux);
        let trial_norm = scaled_norm(&trial_residual, &ed.volumes);
        if !trial_norm.is_finite() {
            cfl = (cfl / cfg.cfl_cut).max(CFL_FLOOR);
            stats.history.push(IterationRecord { iter, residual_norm: norm, cfl });
            continue;
        }

        *field = trial;
        residual = trial_residual;
        stats.residual_norm = trial_norm;
        stats.raw_residual_norm = max_norm(&residual);
        stats.history.push(IterationRecord { iter, residual_norm: trial_norm, cfl });
        if trial_norm <= cfg.residual_tol {
            stats.converged = true;
            return Ok(stats);
        }
        cfl = if trial_norm < norm {
            (cfl * cfg.cfl_growth).min(cfg.cfl_max)
        } else {
            (cfl / cfg.cfl_cut).max(CFL_FLOOR)
        };
        norm = trial_norm;
    }
    Ok(stats)
}

fn a_dim(ed: &EdgeData) -> usize {
    super::state::N_FIELDS * ed.n_cells
}
