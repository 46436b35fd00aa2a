//! Boundary-driven mesh deformation: vertex repositioning from the surface
//! curves, equilateral repair of wall triangles, and guarded Jacobi
//! smoothing.

use super::{CurveId, Marker, UnstructuredMesh};
use crate::error::Result;
use crate::geom::{BezierCurve, Point2};
use alloc::vec;
use alloc::vec::Vec;

/// The two fitted surface curves of the current shape.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCurves {
    pub upper: BezierCurve,
    pub lower: BezierCurve,
}

impl SurfaceCurves {
    /// Regularized fit of both surfaces with pinned endpoints, which keeps
    /// the curves joined at the leading and trailing edges.
    pub fn fit(shape: &crate::geom::AirfoilShape, degree: usize, lambda_s: f64) -> Result<Self> {
        let opts = crate::geom::FitOptions { lambda_s, pin_endpoints: true };
        Ok(SurfaceCurves {
            upper: crate::geom::fit_bezier_with(shape.upper(), degree, None, opts)?,
            lower: crate::geom::fit_bezier_with(shape.lower(), degree, None, opts)?,
        })
    }

    pub fn point(&self, curve: CurveId, t: f64) -> Result<Point2> {
        match curve {
            CurveId::Upper => self.upper.point(t),
            CurveId::Lower => self.lower.point(t),
        }
    }
}

/// Moves every airfoil vertex to its curve position and reports how many
/// triangles are inverted afterwards. Interior vertices stay put, so a large
/// deformation step typically needs repair and smoothing next.
pub fn update_boundary(mesh: &mut UnstructuredMesh, curves: &SurfaceCurves) -> Result<usize> {
    for (&v, bp) in &mesh.boundary_map {
        mesh.vertices[v] = curves.point(bp.curve, bp.t)?;
    }
    Ok(mesh.inverted_triangles().len())
}

fn bad_incident(mesh: &UnstructuredMesh, tris: &[usize]) -> usize {
    tris.iter().filter(|&&t| mesh.signed_area(t) <= 0.0).count()
}

/// Jacobi smoothing: each movable vertex proposes the average of its edge
/// neighbors, computed from the pre-sweep positions. A move is applied only
/// if it does not increase the number of inverted triangles incident to the
/// vertex, which lets sweeps untangle without ever making things worse.
///
/// Returns the number of vertex moves applied.
pub fn laplacian_smooth(
    mesh: &mut UnstructuredMesh,
    sweeps: usize,
    movable: &[bool],
) -> usize {
    debug_assert_eq!(movable.len(), mesh.n_vertices());
    let neighbors = mesh.vertex_neighbors();
    let vertex_tris = mesh.vertex_triangles();
    let mut moved = 0;
    for _ in 0..sweeps {
        let snapshot = mesh.vertices.clone();
        for v in 0..mesh.n_vertices() {
            if !movable[v] || neighbors[v].is_empty() {
                continue;
            }
            let mut avg = Point2::default();
            for &n in &neighbors[v] {
                avg = avg + snapshot[n];
            }
            let proposal = avg / neighbors[v].len() as f64;
            let before = bad_incident(mesh, &vertex_tris[v]);
            let old = mesh.vertices[v];
            mesh.vertices[v] = proposal;
            if bad_incident(mesh, &vertex_tris[v]) > before {
                mesh.vertices[v] = old;
            } else {
                moved += 1;
            }
        }
    }
    moved
}

/// Rebuilds wall-adjacent triangles as near-equilateral: for each triangle
/// whose airfoil-edge is a true boundary edge, the interior apex moves to the
/// equilateral position over that edge (on its current side). Moves that
/// would increase local inversions are skipped.
///
/// Returns the number of apex relocations.
pub fn repair_boundary_triangles(mesh: &mut UnstructuredMesh) -> usize {
    let edge_tris = mesh.edge_triangles();
    let vertex_tris = mesh.vertex_triangles();
    let mut relocated = 0;
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangles[t];
        let wall: Vec<usize> =
            tri.iter().copied().filter(|&v| mesh.markers[v] == Marker::Airfoil).collect();
        if wall.len() != 2 {
            continue;
        }
        let apex = *tri.iter().find(|v| !wall.contains(v)).unwrap();
        if mesh.markers[apex] != Marker::Interior {
            continue;
        }
        let key = (wall[0].min(wall[1]), wall[0].max(wall[1]));
        if edge_tris[&key].len() != 1 {
            continue; // the wall pair is chorded across the surface, not a boundary edge
        }
        let a = mesh.vertices[wall[0]];
        let b = mesh.vertices[wall[1]];
        let mid = (a + b) * 0.5;
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let n = Point2::new(-d.y, d.x) / len;
        let side = if (mesh.vertices[apex] - mid).dot(n) >= 0.0 { 1.0 } else { -1.0 };
        let target = mid + n * (side * len * libm::sqrt(3.0) / 2.0);
        let before = bad_incident(mesh, &vertex_tris[apex]);
        let old = mesh.vertices[apex];
        mesh.vertices[apex] = target;
        if bad_incident(mesh, &vertex_tris[apex]) > before {
            mesh.vertices[apex] = old;
        } else {
            relocated += 1;
        }
    }
    relocated
}

/// Movable mask for the post-deformation smoothing pass: level-1 and level-2
/// vertices only, and never boundary vertices of either kind.
pub fn level_smoothing_mask(mesh: &UnstructuredMesh) -> Vec<bool> {
    let (l1, l2) = mesh.classify_levels();
    let mut movable = vec![false; mesh.n_vertices()];
    for &v in l1.iter().chain(&l2) {
        if mesh.markers[v] == Marker::Interior {
            movable[v] = true;
        }
    }
    movable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MeshConfig;
    use crate::geom::{apply_action, naca4_init, DeformAction};
    use crate::mesh::generate_omesh;
    use approx::assert_relative_eq;

    fn fit_curves(shape: &crate::geom::AirfoilShape) -> SurfaceCurves {
        SurfaceCurves::fit(shape, 16, 3e-4).unwrap()
    }

    #[test]
    fn identity_update_keeps_mesh_valid() {
        let shape = naca4_init(0.12, 132).unwrap();
        let mut mesh = generate_omesh(&shape, &MeshConfig::default()).unwrap();
        let inverted = update_boundary(&mut mesh, &fit_curves(&shape)).unwrap();
        assert_eq!(inverted, 0);
        mesh.validate().unwrap();
    }

    #[test]
    fn deform_repair_smooth_recovers_validity() {
        let shape = naca4_init(0.12, 132).unwrap();
        let mut mesh = generate_omesh(&shape, &MeshConfig::default()).unwrap();
        // A strong legal bump near the leading edge, where cells are smallest.
        let action = DeformAction { x_target: 0.05, y_upper: 0.005, y_lower: 0.005, delta: 0.2 };
        let moved = apply_action(&shape, &action).unwrap();
        let curves = fit_curves(&moved);
        update_boundary(&mut mesh, &curves).unwrap();
        repair_boundary_triangles(&mut mesh);
        let mask = level_smoothing_mask(&mesh);
        laplacian_smooth(&mut mesh, 3, &mask);
        assert!(mesh.inverted_triangles().is_empty());
        let q = mesh.quality_metrics();
        assert!(q.min_angle_deg >= 10.0, "min angle {}", q.min_angle_deg);
    }

    #[test]
    fn repair_places_apex_at_equilateral_height() {
        // One wall edge of length h with a badly sheared apex.
        use crate::mesh::{BoundaryPoint, CurveId};
        use alloc::collections::BTreeMap;
        let h = 0.2;
        let vertices = vec![
            Point2::new(0.0, 0.0),
            Point2::new(h, 0.0),
            Point2::new(0.35, 0.02),
            Point2::new(0.1, 0.4),
        ];
        let markers =
            vec![Marker::Airfoil, Marker::Airfoil, Marker::Interior, Marker::Interior];
        let mut boundary_map = BTreeMap::new();
        boundary_map.insert(0, BoundaryPoint { curve: CurveId::Upper, t: 0.0 });
        boundary_map.insert(1, BoundaryPoint { curve: CurveId::Upper, t: 0.1 });
        // Deliberately open fixture (no closed far-field loop); repair only
        // looks at edge adjacency counts, not boundary-marker consistency.
        let mut mesh = UnstructuredMesh {
            vertices,
            triangles: vec![[0, 1, 2], [0, 2, 3]],
            markers,
            boundary_map,
        };
        let relocated = repair_boundary_triangles(&mut mesh);
        assert_eq!(relocated, 1);
        let apex = mesh.vertices[2];
        let mid = Point2::new(h / 2.0, 0.0);
        assert_relative_eq!(apex.dist(mid), h * 3.0_f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(apex.x, h / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn smoothing_moves_interior_vertex_to_neighbor_average() {
        use alloc::collections::BTreeMap;
        // A fan around one interior vertex; its neighbors form a square.
        let vertices = vec![
            Point2::new(0.3, 0.1), // off-center interior vertex
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
        ];
        let markers = vec![
            Marker::Interior,
            Marker::Farfield,
            Marker::Farfield,
            Marker::Farfield,
            Marker::Farfield,
        ];
        let mut mesh = UnstructuredMesh {
            vertices,
            triangles: vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]],
            markers,
            boundary_map: BTreeMap::new(),
        };
        mesh.validate().unwrap();
        let movable = vec![true, false, false, false, false];
        let moved = laplacian_smooth(&mut mesh, 1, &movable);
        assert_eq!(moved, 1);
        assert_relative_eq!(mesh.vertices[0].x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(mesh.vertices[0].y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn smoothing_skips_inverting_moves() {
        use alloc::collections::BTreeMap;
        // Neighbor average of vertex 0 lies outside triangle [0,1,2]'s
        // feasible region, so the move must be rejected.
        let vertices = vec![
            Point2::new(0.0, 0.1),
            Point2::new(-1.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 4.0),
        ];
        let markers =
            vec![Marker::Interior, Marker::Farfield, Marker::Farfield, Marker::Farfield];
        let mut mesh = UnstructuredMesh {
            vertices: vertices.clone(),
            triangles: vec![[1, 2, 0], [1, 0, 3], [0, 2, 3]],
            markers,
            boundary_map: BTreeMap::new(),
        };
        mesh.validate().unwrap();
        let movable = vec![true, false, false, false];
        // Dragging vertex 3 far below the base line inverts the two side
        // triangles. The neighbor average of vertex 0 becomes (0, -3); moving
        // there would additionally invert [1,2,0], taking the local inverted
        // count from 2 to 3, so the guard must refuse the move.
        mesh.vertices[3] = Point2::new(0.0, -9.0);
        let moved = laplacian_smooth(&mut mesh, 1, &movable);
        assert_eq!(moved, 0);
        assert_eq!(mesh.vertices[0], vertices[0]);
    }

    #[test]
    fn level_classification_on_a_single_ring() {
        let shape = naca4_init(0.12, 32).unwrap();
        let config = MeshConfig { n_layers: 2, ..MeshConfig::default() };
        let mesh = generate_omesh(&shape, &config).unwrap();
        let (l1, l2) = mesh.classify_levels();
        let nb = shape.boundary_polygon().len();
        // Ring 1 is level-1 in its entirety; the far-field ring is level-2
        // because its triangles touch ring 1.
        assert_eq!(l1.len(), nb);
        assert!(l1.iter().all(|&v| (nb..2 * nb).contains(&v)));
        assert_eq!(l2.len(), nb);
        assert!(l2.iter().all(|&v| v >= 2 * nb));
    }
}
