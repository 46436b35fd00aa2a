//! Goal-oriented error estimation and mesh adaptation.
//!
//! Each adaptation step embeds the working mesh in a uniformly refined one,
//! injects the converged coarse solution, and solves the transposed
//! linearized system there. Weighting the fine-space residual with that
//! dual solution yields both a correction to the functional and per-cell
//! error indicators that drive marking.

use crate::config::{DwrConfig, Functional, SolverConfig};
use crate::error::{CoreError, Result};
use crate::euler::{
    assemble_residual, flow_jacobian, functional_gradient, functional_value, pressure_forces,
    solve_steady, EdgeData, FlowField, FreeStream, SolveStats, N_FIELDS,
};
use crate::mesh::{
    refine_marked, uniform_refine, RefinementHierarchy, SurfaceCurves, UnstructuredMesh,
};
use crate::sparse::{bicgstab, BicgstabParams, BlockIlu0, BsrMatrix};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Guards the logarithm of indicators that happen to be exactly zero.
const ETA_FLOOR: f64 = 1e-30;

/// One row of the adaptation history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: usize,
    pub cells_coarse: usize,
    pub cells_fine: usize,
    /// Functional of the injected coarse solution evaluated on the fine
    /// mesh.
    pub j_uncorrected: f64,
    /// Dual-weighted residual `z . R`; subtracting it from the uncorrected
    /// value gives the estimate of the fine-mesh functional.
    pub correction: f64,
    pub j_corrected: f64,
    /// Marking threshold chosen from the indicator distribution.
    pub tol: f64,
    /// Number of cells above the threshold.
    pub marked: usize,
    /// Functional of the budget-capped fine reference solve. Diagnostic
    /// only; not part of the history CSV.
    pub j_fine_solve: f64,
}

/// Everything a single estimation step produces.
#[derive(Debug, Clone)]
pub struct DwrStep {
    pub record: StepRecord,
    /// Coarse cells above the marking threshold.
    pub marked: Vec<usize>,
    /// Per-coarse-cell error indicators.
    pub indicators: Vec<f64>,
    pub coarse_field: FlowField,
    pub coarse_stats: SolveStats,
    pub fine_stats: SolveStats,
}

/// Result of the adaptation loop.
#[derive(Debug, Clone)]
pub struct AdaptOutcome {
    pub history: Vec<StepRecord>,
    /// Corrected functional of the last executed step.
    pub corrected: f64,
    /// Mesh after the last refinement the cell budget admitted.
    pub final_mesh: UnstructuredMesh,
}

/// Injects a coarse field into the embedded fine space: every child cell
/// inherits its parent's cell average.
pub fn prolongate(hierarchy: &RefinementHierarchy, coarse: &FlowField) -> FlowField {
    let mut fine = FlowField::uniform(hierarchy.parent_map.len(), [0.0; 4]);
    for (child, &parent) in hierarchy.parent_map.iter().enumerate() {
        fine.set_state(child, coarse.state(parent));
    }
    fine
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the transposed system `(dR/du)^T z = g` with ILU-preconditioned
/// BiCGStab; unlike the shifted Newton systems, the raw transposed
/// Jacobian makes restarted GMRES stagnate well above tight tolerances.
/// A dual that has not converged silently corrupts every indicator
/// downstream, so failure to reach `tol` is an error.
pub fn solve_dual(a: &BsrMatrix, g: &[f64], tol: f64) -> Result<Vec<f64>> {
    let at = a.transpose();
    let ilu = BlockIlu0::factor(&at)?;
    let params = BicgstabParams { tol, ..BicgstabParams::default() };
    let zeros = vec![0.0; at.dim()];
    let (z, info) = bicgstab(&at, Some(&ilu), g, &zeros, &params)?;
    if !info.converged {
        return Err(CoreError::LinearSolver(format!(
            "dual solve stalled at relative residual {:.3e} after {} iterations",
            info.residual, info.iterations
        )));
    }
    Ok(z)
}

/// Per-coarse-cell indicators: the dual-weighted residual magnitudes of the
/// children, summed.
pub fn error_indicators(
    parent_map: &[usize],
    n_coarse: usize,
    dual: &[f64],
    fine_residual: &[f64],
) -> Vec<f64> {
    let mut eta = vec![0.0; n_coarse];
    for (child, &parent) in parent_map.iter().enumerate() {
        let s = N_FIELDS * child;
        let contribution = dot(&dual[s..s + N_FIELDS], &fine_residual[s..s + N_FIELDS]);
        eta[parent] += libm::fabs(contribution);
    }
    eta
}

/// Marking threshold `exp(mean + k * std)` of the log indicators. Working
/// in the log keeps the threshold stable under the orders-of-magnitude
/// spread a converged flow produces.
pub fn auto_threshold(eta: &[f64], k: f64) -> f64 {
    let n = eta.len() as f64;
    let logs: Vec<f64> = eta.iter().map(|e| libm::log(e + ETA_FLOOR)).collect();
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n;
    libm::exp(mean + k * libm::sqrt(var))
}

/// Cells whose indicator strictly exceeds the threshold.
pub fn mark_cells(eta: &[f64], tol: f64) -> Vec<usize> {
    eta.iter()
        .enumerate()
        .filter(|(_, e)| **e > tol)
        .map(|(c, _)| c)
        .collect()
}

/// One estimation step: solve on `mesh`, embed, solve the dual at the
/// injected state, and derive the corrected functional plus marking.
///
/// The coarse solve must converge; the budget-capped fine solve is a
/// reference and may stop early. For the lift-to-drag ratio the marking
/// indicators come from the drag dual while the correction itself uses the
/// ratio's own dual.
pub fn dwr_step(
    mesh: &UnstructuredMesh,
    curves: Option<&SurfaceCurves>,
    fs: &FreeStream,
    solver: &SolverConfig,
    dwr: &DwrConfig,
    step: usize,
) -> Result<DwrStep> {
    let coarse_ed = EdgeData::build(mesh)?;
    let mut coarse_field = FlowField::uniform(coarse_ed.n_cells, fs.state);
    let coarse_stats = solve_steady(&coarse_ed, &mut coarse_field, fs, solver)?;
    if !coarse_stats.converged {
        return Err(CoreError::Newton(format!(
            "coarse solve stalled at residual {:.3e} after {} iterations",
            coarse_stats.residual_norm, coarse_stats.iterations
        )));
    }

    let hierarchy = uniform_refine(mesh, curves)?;
    let fine_ed = EdgeData::build(&hierarchy.fine)?;
    let injected = prolongate(&hierarchy, &coarse_field);
    let fine_residual = assemble_residual(&fine_ed, &injected, fs, solver.flux);

    // Reference solve, warm-started from the injection and capped.
    let mut fine_field = injected.clone();
    let fine_cfg = SolverConfig { max_newton_iters: dwr.fine_newton_iters, ..*solver };
    let fine_stats = solve_steady(&fine_ed, &mut fine_field, fs, &fine_cfg)?;
    let j_fine_solve = functional_value(dwr.functional, &pressure_forces(&fine_ed, &fine_field, fs));

    let a = flow_jacobian(&fine_ed, &injected, fs, solver.flux)?;
    let g = functional_gradient(&fine_ed, &injected, fs, dwr.functional);
    let dual = solve_dual(&a, &g, dwr.adjoint_tol)?;

    let j_uncorrected =
        functional_value(dwr.functional, &pressure_forces(&fine_ed, &injected, fs));
    let correction = dot(&dual, &fine_residual);

    let indicators = if dwr.functional == Functional::Ratio {
        let g_drag = functional_gradient(&fine_ed, &injected, fs, Functional::Drag);
        let drag_dual = solve_dual(&a, &g_drag, dwr.adjoint_tol)?;
        error_indicators(&hierarchy.parent_map, mesh.n_triangles(), &drag_dual, &fine_residual)
    } else {
        error_indicators(&hierarchy.parent_map, mesh.n_triangles(), &dual, &fine_residual)
    };
    let tol = auto_threshold(&indicators, dwr.tol_k);
    let marked = mark_cells(&indicators, tol);

    Ok(DwrStep {
        record: StepRecord {
            step,
            cells_coarse: mesh.n_triangles(),
            cells_fine: hierarchy.fine.n_triangles(),
            j_uncorrected,
            correction,
            j_corrected: j_uncorrected - correction,
            tol,
            marked: marked.len(),
            j_fine_solve,
        },
        marked,
        indicators,
        coarse_field,
        coarse_stats,
        fine_stats,
    })
}

/// Runs `dwr.adapt_steps` estimation steps, refining the marked cells
/// after each one as long as the refined mesh stays within the cell
/// budget.
pub fn dwr_adapt_loop(
    initial: &UnstructuredMesh,
    curves: Option<&SurfaceCurves>,
    fs: &FreeStream,
    solver: &SolverConfig,
    dwr: &DwrConfig,
) -> Result<AdaptOutcome> {
    let mut mesh = initial.clone();
    let mut history: Vec<StepRecord> = Vec::new();
    for step in 1..=dwr.adapt_steps {
        let s = dwr_step(&mesh, curves, fs, solver, dwr, step)?;
        history.push(s.record);
        let refined = refine_marked(&mesh, &s.marked, curves)?;
        if refined.n_triangles() > dwr.max_cells {
            break;
        }
        mesh = refined;
    }
    let corrected = history
        .last()
        .map(|r| r.j_corrected)
        .ok_or_else(|| CoreError::domain("adaptation loop ran zero steps"))?;
    Ok(AdaptOutcome { history, corrected, final_mesh: mesh })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{FlowConfig, MeshConfig};
    use crate::geom::naca4_init;
    use crate::mesh::generate_omesh;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naca_case(
        n_points: usize,
        layers: usize,
    ) -> (UnstructuredMesh, SurfaceCurves, FreeStream) {
        let shape = naca4_init(0.12, n_points).unwrap();
        let config = MeshConfig { n_layers: layers, ..MeshConfig::default() };
        let mesh = generate_omesh(&shape, &config).unwrap();
        let curves = SurfaceCurves::fit(&shape, 8, 1e-3).unwrap();
        let fs = FreeStream::new(&FlowConfig { mach: 0.5, alpha_deg: 0.0, gamma: 1.4 });
        (mesh, curves, fs)
    }

    #[test]
    fn prolongation_injects_parent_states() {
        let (mesh, curves, _) = naca_case(32, 4);
        let h = uniform_refine(&mesh, Some(&curves)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut coarse = FlowField::uniform(mesh.n_triangles(), [0.0; 4]);
        for c in 0..mesh.n_triangles() {
            coarse.set_state(c, core::array::from_fn(|_| rng.random_range(-1.0..1.0)));
        }
        let fine = prolongate(&h, &coarse);
        assert_eq!(fine.n_cells(), h.fine.n_triangles());
        for (child, &parent) in h.parent_map.iter().enumerate() {
            assert_eq!(fine.state(child), coarse.state(parent));
        }
    }

    #[test]
    fn indicators_accumulate_child_contributions_by_magnitude() {
        // Two parents with two children each; contributions of opposite
        // sign must not cancel.
        let parent_map = [0, 0, 1, 1];
        let dual = [
            1.0, 0.0, 0.0, 0.0, //
            -1.0, 0.0, 0.0, 0.0, //
            0.0, 2.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.5,
        ];
        let residual = [
            3.0, 0.0, 0.0, 0.0, //
            3.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, -4.0,
        ];
        let eta = error_indicators(&parent_map, 2, &dual, &residual);
        assert_relative_eq!(eta[0], 6.0);
        assert_relative_eq!(eta[1], 4.0);
    }

    #[test]
    fn threshold_is_the_log_mean_plus_k_sigma_and_marking_is_strict() {
        let eta = [1e-4, 1e-3, 1e-2, 1e-1];
        let logs: Vec<f64> = eta.iter().map(|e| (e + ETA_FLOOR).ln()).collect();
        let mean = logs.iter().sum::<f64>() / 4.0;
        let std = (logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / 4.0).sqrt();
        let tol = auto_threshold(&eta, 1.0);
        assert_relative_eq!(tol, (mean + std).exp(), max_relative = 1e-12);
        // With k = 0 the threshold is the geometric mean, which sits
        // exactly between the middle two entries; only the top two exceed
        // it, and an indicator equal to the threshold is not marked.
        let gm = auto_threshold(&eta, 0.0);
        assert_eq!(mark_cells(&eta, gm), vec![2, 3]);
        assert_eq!(mark_cells(&[gm, 2.0 * gm], gm), vec![1]);
    }

    #[test]
    fn dual_satisfies_the_inner_product_identity() {
        // z^T b must equal g^T y whenever J^T z = g and J y = b; this holds
        // at the linear-solver tolerance and pins the transpose wiring.
        let (mesh, _, fs) = naca_case(32, 4);
        let ed = EdgeData::build(&mesh).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut field = FlowField::uniform(ed.n_cells, fs.state);
        for c in 0..ed.n_cells {
            let mut u = field.state(c);
            for v in u.iter_mut() {
                *v *= 1.0 + rng.random_range(-0.05..0.05);
            }
            field.set_state(c, u);
        }
        let solver = SolverConfig::default();
        let a = flow_jacobian(&ed, &field, &fs, solver.flux).unwrap();
        let g = functional_gradient(&ed, &field, &fs, Functional::Drag);
        let tol = 1e-10;
        let z = solve_dual(&a, &g, tol).unwrap();
        let b: Vec<f64> = (0..a.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ilu = BlockIlu0::factor(&a).unwrap();
        let params = BicgstabParams { tol, ..BicgstabParams::default() };
        let (y, info) = bicgstab(&a, Some(&ilu), &b, &vec![0.0; a.dim()], &params).unwrap();
        assert!(info.converged);
        let lhs = dot(&z, &b);
        let rhs = dot(&g, &y);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-6, epsilon = 1e-10);
    }

    #[test]
    fn correction_moves_the_functional_toward_the_fine_solve() {
        let (mesh, curves, fs) = naca_case(32, 4);
        let solver = SolverConfig::default();
        // Generous budget so the reference actually converges here.
        let dwr = DwrConfig { fine_newton_iters: 200, ..DwrConfig::default() };
        let s = dwr_step(&mesh, Some(&curves), &fs, &solver, &dwr, 1).unwrap();
        assert!(s.fine_stats.converged);
        let r = s.record;
        let err_corrected = (r.j_corrected - r.j_fine_solve).abs();
        let err_uncorrected = (r.j_uncorrected - r.j_fine_solve).abs();
        assert!(
            err_corrected < err_uncorrected,
            "correction did not help: {} vs {}",
            err_corrected,
            err_uncorrected
        );
        assert!(r.marked > 0 && r.marked < r.cells_coarse);
        assert_eq!(r.cells_fine, 4 * r.cells_coarse);
    }

    #[test]
    fn adaptation_loop_grows_the_mesh_and_keeps_history() {
        let (mesh, curves, fs) = naca_case(32, 4);
        let solver = SolverConfig::default();
        let dwr = DwrConfig { adapt_steps: 2, ..DwrConfig::default() };
        let out = dwr_adapt_loop(&mesh, Some(&curves), &fs, &solver, &dwr).unwrap();
        assert_eq!(out.history.len(), 2);
        assert_eq!(out.history[0].step, 1);
        assert_eq!(out.history[1].step, 2);
        assert!(out.history[1].cells_coarse > out.history[0].cells_coarse);
        assert!(out.final_mesh.n_triangles() > out.history[1].cells_coarse);
        assert_eq!(out.corrected, out.history[1].j_corrected);
        out.final_mesh.validate().unwrap();
        for r in &out.history {
            assert!(r.j_corrected.is_finite() && r.tol > 0.0);
        }
    }
}
