//! Pressure forces on the airfoil and their state derivatives.
//!
//! Inviscid flow exerts pressure forces only, so every coefficient is a
//! weighted sum of wall-cell pressures. The weights depend on geometry and
//! the free stream alone, which keeps the exact functional gradient sparse:
//! it is nonzero only in cells that touch the wall.

use super::assemble::EdgeData;
use super::state::{dp_du, pressure, FlowField, FreeStream, N_FIELDS};
use crate::config::Functional;
use crate::geom::Point2;
use alloc::vec;
use alloc::vec::Vec;

/// Net pressure force on the body and the associated coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroForces {
    pub fx: f64,
    pub fy: f64,
    pub cd: f64,
    pub cl: f64,
}

/// Integrates cell pressure over the wall. The boundary normal points out
/// of the fluid, i.e. into the body, so the sum is the force exerted on
/// the airfoil.
pub fn pressure_forces(ed: &EdgeData, field: &FlowField, fs: &FreeStream) -> AeroForces {
    let mut fx = 0.0;
    let mut fy = 0.0;
    for e in &ed.wall {
        let p = pressure(&field.state(e.cell), fs.gamma);
        fx += p * e.normal.x * e.length;
        fy += p * e.normal.y * e.length;
    }
    let q = fs.dynamic_pressure();
    let d = fs.drag_direction();
    let l = fs.lift_direction();
    AeroForces {
        fx,
        fy,
        cd: (fx * d.x + fy * d.y) / q,
        cl: (fx * l.x + fy * l.y) / q,
    }
}

/// Scalar output the adjoint machinery differentiates.
pub fn functional_value(kind: Functional, f: &AeroForces) -> f64 {
    match kind {
        Functional::Drag => f.cd,
        Functional::Lift => f.cl,
        Functional::Ratio => f.cl / f.cd,
    }
}

/// Gradient of a single force coefficient along `dir`.
fn coefficient_gradient(ed: &EdgeData, field: &FlowField, fs: &FreeStream, dir: Point2) -> Vec<f64> {
    let mut g = vec![0.0; N_FIELDS * ed.n_cells];
    let q = fs.dynamic_pressure();
    for e in &ed.wall {
        let w = (e.normal.x * dir.x + e.normal.y * dir.y) * e.length / q;
        let dp = dp_du(&field.state(e.cell), fs.gamma);
        for k in 0..N_FIELDS {
            g[N_FIELDS * e.cell + k] += w * dp[k];
        }
    }
    g
}

/// Exact gradient `dJ/du` of the requested functional, shaped like the
/// flow field.
pub fn functional_gradient(
    ed: &EdgeData,
    field: &FlowField,
    fs: &FreeStream,
    kind: Functional,
) -> Vec<f64> {
    match kind {
        Functional::Drag => coefficient_gradient(ed, field, fs, fs.drag_direction()),
        Functional::Lift => coefficient_gradient(ed, field, fs, fs.lift_direction()),
        Functional::Ratio => {
            let f = pressure_forces(ed, field, fs);
            let dcd = coefficient_gradient(ed, field, fs, fs.drag_direction());
            let dcl = coefficient_gradient(ed, field, fs, fs.lift_direction());
            dcl.iter()
                .zip(&dcd)
                .map(|(l, d)| (l * f.cd - f.cl * d) / (f.cd * f.cd))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{FlowConfig, MeshConfig};
    use crate::euler::FlowField;
    use crate::geom::naca4_init;
    use crate::mesh::generate_omesh;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> (EdgeData, FreeStream, FlowField) {
        let shape = naca4_init(0.12, 32).unwrap();
        let config = MeshConfig { n_layers: 4, ..MeshConfig::default() };
        let mesh = generate_omesh(&shape, &config).unwrap();
        let ed = EdgeData::build(&mesh).unwrap();
        let fs = FreeStream::new(&FlowConfig { mach: 0.8, alpha_deg: 1.25, gamma: 1.4 });
        let mut field = FlowField::uniform(ed.n_cells, fs.state);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for c in 0..ed.n_cells {
            let mut u = field.state(c);
            for v in u.iter_mut() {
                *v *= 1.0 + rng.random_range(-0.05..0.05);
            }
            field.set_state(c, u);
        }
        assert!(field.is_physical(fs.gamma));
        (ed, fs, field)
    }

    #[test]
    fn uniform_pressure_exerts_no_net_force() {
        let (ed, fs, _) = fixture();
        let field = FlowField::uniform(ed.n_cells, fs.state);
        let f = pressure_forces(&ed, &field, &fs);
        // The wall polygon is closed, so constant pressure integrates to
        // zero up to roundoff.
        assert!(f.fx.abs() < 1e-12, "fx {}", f.fx);
        assert!(f.fy.abs() < 1e-12, "fy {}", f.fy);
        assert!(f.cd.abs() < 1e-11);
        assert!(f.cl.abs() < 1e-11);
    }

    #[test]
    fn gradients_match_finite_differences_and_vanish_off_the_wall() {
        let (ed, fs, field) = fixture();
        let mut wall_cells = vec![false; ed.n_cells];
        for e in &ed.wall {
            wall_cells[e.cell] = true;
        }
        for kind in [Functional::Drag, Functional::Lift, Functional::Ratio] {
            let g = functional_gradient(&ed, &field, &fs, kind);
            let probe: Vec<usize> = (0..ed.n_cells)
                .filter(|c| wall_cells[*c])
                .take(3)
                .chain((0..ed.n_cells).filter(|c| !wall_cells[*c]).take(2))
                .collect();
            for c in probe {
                for k in 0..N_FIELDS {
                    let idx = N_FIELDS * c + k;
                    let eps = 1e-6;
                    let mut fp = field.clone();
                    let mut fm = field.clone();
                    fp.as_mut_slice()[idx] += eps;
                    fm.as_mut_slice()[idx] -= eps;
                    let jp = functional_value(kind, &pressure_forces(&ed, &fp, &fs));
                    let jm = functional_value(kind, &pressure_forces(&ed, &fm, &fs));
                    let fd = (jp - jm) / (2.0 * eps);
                    assert!(
                        (g[idx] - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                        "cell {c} comp {k}: {} vs {}",
                        g[idx],
                        fd
                    );
                    if !wall_cells[c] {
                        assert_eq!(g[idx], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn drag_of_a_picked_wall_cell_scales_with_its_pressure() {
        let (ed, fs, field) = fixture();
        let e = ed.wall[0];
        let mut bumped = field.clone();
        let mut u = bumped.state(e.cell);
        // Raising only the energy raises pressure by (gamma - 1) * de.
        u[3] += 0.01;
        bumped.set_state(e.cell, u);
        let base = pressure_forces(&ed, &field, &fs);
        let after = pressure_forces(&ed, &bumped, &fs);
        let mut expected_dfx = 0.0;
        let mut expected_dfy = 0.0;
        for w in ed.wall.iter().filter(|w| w.cell == e.cell) {
            expected_dfx += (fs.gamma - 1.0) * 0.01 * w.normal.x * w.length;
            expected_dfy += (fs.gamma - 1.0) * 0.01 * w.normal.y * w.length;
        }
        approx::assert_relative_eq!(after.fx - base.fx, expected_dfx, max_relative = 1e-9);
        approx::assert_relative_eq!(after.fy - base.fy, expected_dfy, max_relative = 1e-9);
    }
}
