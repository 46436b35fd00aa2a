//! End-to-end checks of the implicit flow solver on generated O-meshes.

use airfoil_core::config::{FlowConfig, MeshConfig, SolverConfig};
use airfoil_core::euler::{
    assemble_residual, max_norm, pressure_forces, solve_steady, EdgeData, FlowField, FreeStream,
};
use airfoil_core::geom::naca4_init;
use airfoil_core::mesh::generate_omesh;

fn solve_case(
    n_points: usize,
    layers: usize,
    flow: FlowConfig,
    solver: SolverConfig,
) -> (EdgeData, FreeStream, FlowField, airfoil_core::euler::SolveStats) {
    let shape = naca4_init(0.12, n_points).unwrap();
    let config = MeshConfig { n_layers: layers, ..MeshConfig::default() };
    let mesh = generate_omesh(&shape, &config).unwrap();
    let ed = EdgeData::build(&mesh).unwrap();
    let fs = FreeStream::new(&flow);
    let mut field = FlowField::uniform(ed.n_cells, fs.state);
    let stats = solve_steady(&ed, &mut field, &fs, &solver).unwrap();
    (ed, fs, field, stats)
}

#[test]
fn transonic_default_case_converges_and_is_symmetric() {
    let (ed, fs, field, stats) = solve_case(
        132,
        MeshConfig::default().n_layers,
        FlowConfig { mach: 0.85, alpha_deg: 0.0, gamma: 1.4 },
        SolverConfig::default(),
    );
    assert!(stats.converged, "stalled at {}", stats.residual_norm);
    assert!(stats.iterations < 100, "took {} Newton steps", stats.iterations);
    // The unscaled flux balance of the converged field is far below the
    // nominal tolerance because the binding cells are the smallest ones.
    let raw = max_norm(&assemble_residual(&ed, &field, &fs, SolverConfig::default().flux));
    assert!(raw < 1e-3, "raw flux balance {raw}");
    let f = pressure_forces(&ed, &field, &fs);
    assert!(f.cl.abs() < 5e-3, "symmetric case lifted: cl = {}", f.cl);
    // First-order dissipation inflates drag well above the vanishing
    // inviscid value; this brackets the expected single-mesh range.
    assert!(f.cd > 0.02 && f.cd < 0.12, "cd = {}", f.cd);
}

#[test]
fn both_flux_schemes_agree_on_a_coarse_subsonic_case() {
    let flow = FlowConfig { mach: 0.5, alpha_deg: 0.0, gamma: 1.4 };
    let mut cds = Vec::new();
    for flux in [
        airfoil_core::config::FluxScheme::Rusanov,
        airfoil_core::config::FluxScheme::Hllc,
    ] {
        let solver = SolverConfig { flux, ..SolverConfig::default() };
        let (ed, fs, field, stats) = solve_case(64, 8, flow, solver);
        assert!(stats.converged, "{flux:?} stalled at {}", stats.residual_norm);
        let f = pressure_forces(&ed, &field, &fs);
        assert!(f.cl.abs() < 5e-3, "{flux:?} cl = {}", f.cl);
        assert!(f.cd > 0.0, "{flux:?} cd = {}", f.cd);
        cds.push(f.cd);
    }
    // Same mesh, same order: the two approximate Riemann solvers should
    // produce drags of the same magnitude, HLLC the less dissipative one.
    assert!(cds[1] < cds[0] * 1.05, "rusanov {} vs hllc {}", cds[0], cds[1]);
    assert!(cds[1] > cds[0] * 0.2, "rusanov {} vs hllc {}", cds[0], cds[1]);
}
