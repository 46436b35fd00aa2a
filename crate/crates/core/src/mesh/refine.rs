//! Conforming refinement: red subdivision with green closure, the uniform
//! refinement hierarchy used by error estimation, and curvature-driven
//! boundary capture.

use super::deform::SurfaceCurves;
use super::{BoundaryPoint, CurveId, Marker, UnstructuredMesh};
use crate::error::{CoreError, Result};
use crate::geom::turning_angles;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

/// A coarse mesh, its uniform 1-to-4 refinement, and for every fine triangle
/// the index of its coarse parent.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementHierarchy {
    pub coarse: UnstructuredMesh,
    pub fine: UnstructuredMesh,
    pub parent_map: Vec<usize>,
}

/// Maps the endpoints of an airfoil boundary edge onto one common curve.
///
/// The shared leading/trailing edge vertex is stored on the upper curve; when
/// an edge crosses the junction the endpoint with parameter exactly 0 or 1 is
/// reinterpreted on its partner's curve.
fn common_curve_params(
    a: &BoundaryPoint,
    b: &BoundaryPoint,
) -> Result<(CurveId, f64, f64)> {
    if a.curve == b.curve {
        return Ok((a.curve, a.t, b.t));
    }
    if a.t == 0.0 || a.t == 1.0 {
        return Ok((b.curve, a.t, b.t));
    }
    if b.t == 0.0 || b.t == 1.0 {
        return Ok((a.curve, a.t, b.t));
    }
    Err(CoreError::Mesh(format!(
        "boundary edge joins mid-curve points of different curves (t = {}, {})",
        a.t, b.t
    )))
}

struct Subdivision {
    mesh: UnstructuredMesh,
    parent_map: Vec<usize>,
}

/// Splits every edge in `edge_marked`; triangles with 3 marked edges become
/// 4 children, with 1 marked edge 2 children, otherwise they are copied.
/// Callers must pass a closed mark set (no triangle with exactly 2).
fn subdivide(
    mesh: &UnstructuredMesh,
    edge_marked: &BTreeMap<(usize, usize), bool>,
    curves: Option<&SurfaceCurves>,
) -> Result<Subdivision> {
    let edge_tris = mesh.edge_triangles();
    let mut vertices = mesh.vertices.clone();
    let mut markers = mesh.markers.clone();
    let mut boundary_map = mesh.boundary_map.clone();
    let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();

    for (&key, &marked) in edge_marked {
        if !marked {
            continue;
        }
        let (va, vb) = key;
        let pa = mesh.vertices[va];
        let pb = mesh.vertices[vb];
        let straight = (pa + pb) * 0.5;
        let on_boundary = edge_tris[&key].len() == 1;
        let id = vertices.len();
        if on_boundary && mesh.markers[va] == Marker::Airfoil && mesh.markers[vb] == Marker::Airfoil
        {
            let (curve, ta, tb) = common_curve_params(&mesh.boundary_map[&va], &mesh.boundary_map[&vb])?;
            let tm = 0.5 * (ta + tb);
            let pos = match curves {
                Some(c) => c.point(curve, tm)?,
                None => straight,
            };
            vertices.push(pos);
            markers.push(Marker::Airfoil);
            boundary_map.insert(id, BoundaryPoint { curve, t: tm });
        } else if on_boundary
            && mesh.markers[va] == Marker::Farfield
            && mesh.markers[vb] == Marker::Farfield
        {
            // Keep the far field circular when refining with geometry; a
            // plain subdivision (curves = None) stays piecewise linear.
            let pos = match curves {
                Some(_) => {
                    let c = super::omesh::CIRCLE_CENTER;
                    let r = 0.5 * (pa.dist(c) + pb.dist(c));
                    c + (straight - c).normalized() * r
                }
                None => straight,
            };
            vertices.push(pos);
            markers.push(Marker::Farfield);
        } else {
            vertices.push(straight);
            markers.push(Marker::Interior);
        }
        midpoint.insert(key, id);
    }

    let mid_of = |a: usize, b: usize| -> Option<usize> {
        midpoint.get(&(a.min(b), a.max(b))).copied()
    };
    let mut triangles = Vec::new();
    let mut parent_map = Vec::new();
    for (t, &tri) in mesh.triangles.iter().enumerate() {
        let [p, q, r] = tri;
        let mids = [mid_of(p, q), mid_of(q, r), mid_of(r, p)];
        let count = mids.iter().filter(|m| m.is_some()).count();
        match count {
            0 => {
                triangles.push(tri);
                parent_map.push(t);
            }
            1 => {
                let k = mids.iter().position(|m| m.is_some()).unwrap();
                let (va, vb, vc) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let m = mids[k].unwrap();
                triangles.push([va, m, vc]);
                triangles.push([m, vb, vc]);
                parent_map.push(t);
                parent_map.push(t);
            }
            3 => {
                let (mpq, mqr, mrp) = (mids[0].unwrap(), mids[1].unwrap(), mids[2].unwrap());
                triangles.push([p, mpq, mrp]);
                triangles.push([mpq, q, mqr]);
                triangles.push([mrp, mqr, r]);
                triangles.push([mpq, mqr, mrp]);
                for _ in 0..4 {
                    parent_map.push(t);
                }
            }
            n => {
                return Err(CoreError::Mesh(format!(
                    "triangle {} has {} marked edges after closure",
                    t, n
                )))
            }
        }
    }

    let out = UnstructuredMesh { vertices, triangles, markers, boundary_map };
    if let Some(bad) = out.inverted_triangles().first() {
        return Err(CoreError::Mesh(format!(
            "refinement inverted triangle {} (boundary projection too strong for this cell size)",
            bad
        )));
    }
    Ok(Subdivision { mesh: out, parent_map })
}

/// Red/green refinement of the marked triangles.
///
/// Marked triangles are subdivided 1-to-4; the mark set is first closed so
/// that any triangle with two or more marked edges is also fully subdivided,
/// and remaining single-edge triangles are bisected. The result has no
/// hanging nodes. When `curves` is given, airfoil edge midpoints land on the
/// surface curves and far-field midpoints stay on the circle; without curves
/// every midpoint is the straight average of its endpoints.
pub fn refine_marked(
    mesh: &UnstructuredMesh,
    marked: &[usize],
    curves: Option<&SurfaceCurves>,
) -> Result<UnstructuredMesh> {
    let mut edge_marked: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    for key in mesh.edge_triangles().keys() {
        edge_marked.insert(*key, false);
    }
    let mark_tri = |em: &mut BTreeMap<(usize, usize), bool>, tri: &[usize; 3]| {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            em.insert((a.min(b), a.max(b)), true);
        }
    };
    for &t in marked {
        if t >= mesh.n_triangles() {
            return Err(CoreError::domain(format!("marked triangle {} out of range", t)));
        }
        mark_tri(&mut edge_marked, &mesh.triangles[t]);
    }
    // Close: two marked edges promote the third.
    loop {
        let mut changed = false;
        for tri in &mesh.triangles {
            let marked_edges = (0..3)
                .filter(|&k| {
                    let a = tri[k];
                    let b = tri[(k + 1) % 3];
                    edge_marked[&(a.min(b), a.max(b))]
                })
                .count();
            if marked_edges == 2 {
                mark_tri(&mut edge_marked, tri);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    subdivide(mesh, &edge_marked, curves).map(|s| s.mesh)
}

/// Uniform 1-to-4 refinement of the whole mesh. The four children of coarse
/// triangle `t` occupy fine indices `4t .. 4t+4`.
pub fn uniform_refine(
    mesh: &UnstructuredMesh,
    curves: Option<&SurfaceCurves>,
) -> Result<RefinementHierarchy> {
    let mut edge_marked: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    for key in mesh.edge_triangles().keys() {
        edge_marked.insert(*key, true);
    }
    let sub = subdivide(mesh, &edge_marked, curves)?;
    debug_assert!(sub.parent_map.iter().enumerate().all(|(c, &p)| c / 4 == p));
    Ok(RefinementHierarchy { coarse: mesh.clone(), fine: sub.mesh, parent_map: sub.parent_map })
}

/// Marks the wall triangles of airfoil boundary edges whose curve span turns
/// by more than `kappa_tol` radians, measured from `n_samples` dense points
/// per edge. Returns sorted triangle indices.
pub fn curvature_capture(
    mesh: &UnstructuredMesh,
    curves: &SurfaceCurves,
    kappa_tol: f64,
    n_samples: usize,
) -> Result<Vec<usize>> {
    if n_samples < 3 {
        return Err(CoreError::domain("curvature capture needs at least 3 samples per edge"));
    }
    let topo = mesh.edges()?;
    let mut out = Vec::new();
    for e in &topo.boundary {
        if e.marker != Marker::Airfoil {
            continue;
        }
        let (curve, ta, tb) = common_curve_params(&mesh.boundary_map[&e.a], &mesh.boundary_map[&e.b])?;
        let (lo, hi) = (ta.min(tb), ta.max(tb));
        let mut pts = Vec::with_capacity(n_samples);
        for k in 0..n_samples {
            let t = lo + (hi - lo) * k as f64 / (n_samples - 1) as f64;
            pts.push(curves.point(curve, t)?);
        }
        // Coincident dense samples (a zero-length span) carry no turning.
        let turning: f64 = match turning_angles(&pts) {
            Ok(angles) => angles.iter().sum(),
            Err(_) => 0.0,
        };
        if turning > kappa_tol {
            out.push(e.cell);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MeshConfig;
    use crate::geom::naca4_init;
    use crate::mesh::testutil::unit_square;
    use crate::mesh::generate_omesh;
    use approx::assert_relative_eq;

    fn naca_mesh_and_curves(
        n_points: usize,
        layers: usize,
    ) -> (UnstructuredMesh, SurfaceCurves) {
        let shape = naca4_init(0.12, n_points).unwrap();
        let config = MeshConfig { n_layers: layers, ..MeshConfig::default() };
        let mesh = generate_omesh(&shape, &config).unwrap();
        let curves = SurfaceCurves::fit(&shape, 8, 1e-3).unwrap();
        (mesh, curves)
    }

    #[test]
    fn uniform_refine_quadruples_and_preserves_area_without_projection() {
        let mesh = unit_square(3);
        let h = uniform_refine(&mesh, None).unwrap();
        h.fine.validate().unwrap();
        assert_eq!(h.fine.n_triangles(), 4 * mesh.n_triangles());
        assert_eq!(h.parent_map.len(), h.fine.n_triangles());
        assert!((h.fine.total_area() - mesh.total_area()).abs() < 1e-12);
        // Children partition their parent exactly.
        let coarse_areas = mesh.areas();
        let fine_areas = h.fine.areas();
        let mut child_sums = vec![0.0; mesh.n_triangles()];
        for (c, &p) in h.parent_map.iter().enumerate() {
            child_sums[p] += fine_areas[c];
        }
        for (p, &sum) in child_sums.iter().enumerate() {
            assert!((sum - coarse_areas[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn refine_nothing_copies_the_mesh() {
        let mesh = unit_square(2);
        let out = refine_marked(&mesh, &[], None).unwrap();
        assert_eq!(out, mesh);
    }

    #[test]
    fn single_marked_triangle_stays_conforming() {
        let mesh = unit_square(4);
        let out = refine_marked(&mesh, &[7], None).unwrap();
        out.validate().unwrap();
        // Conformity means no hanging nodes: every interior edge is shared by
        // exactly two triangles, and validate() checked edge-manifoldness.
        assert!(out.n_triangles() > mesh.n_triangles());
        assert!((out.total_area() - mesh.total_area()).abs() < 1e-12);
    }

    #[test]
    fn omesh_uniform_refine_projects_wall_midpoints() {
        let (mesh, curves) = naca_mesh_and_curves(32, 4);
        let h = uniform_refine(&mesh, Some(&curves)).unwrap();
        h.fine.validate().unwrap();
        // Every new airfoil vertex evaluates exactly to its mapped curve point.
        for (&v, bp) in &h.fine.boundary_map {
            if v >= mesh.n_vertices() {
                let p = curves.point(bp.curve, bp.t).unwrap();
                assert!(p.dist(h.fine.vertices[v]) < 1e-14);
            }
        }
        // Far-field midpoints stay on the circle.
        let c = crate::mesh::omesh::CIRCLE_CENTER;
        for (v, &m) in h.fine.markers.iter().enumerate() {
            if m == Marker::Farfield {
                assert_relative_eq!(h.fine.vertices[v].dist(c), 35.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn repeated_capture_and_refine_terminates() {
        let (mut mesh, curves) = naca_mesh_and_curves(32, 4);
        let tol = 0.1;
        let mut rounds = 0;
        loop {
            let marked = curvature_capture(&mesh, &curves, tol, 32).unwrap();
            if marked.is_empty() {
                break;
            }
            mesh = refine_marked(&mesh, &marked, Some(&curves)).unwrap();
            rounds += 1;
            assert!(rounds <= 5, "capture did not settle after 5 rounds");
        }
        mesh.validate().unwrap();
        assert!(rounds >= 1, "coarse leading edge should trigger at least one round");
    }

    #[test]
    fn capture_marks_high_curvature_edges_only() {
        // At 64 sample points the nose edges turn by up to ~0.09 radians and
        // everything aft of the nose stays under 0.02, so 0.06 splits them.
        let (mesh, curves) = naca_mesh_and_curves(64, 6);
        let marked = curvature_capture(&mesh, &curves, 0.06, 32).unwrap();
        // The leading edge region turns fast; wall cells there get marked.
        assert!(!marked.is_empty());
        for &t in &marked {
            let [a, b, c] = mesh.triangles[t];
            let x_min = mesh.vertices[a].x.min(mesh.vertices[b].x).min(mesh.vertices[c].x);
            assert!(x_min < 0.2, "marked triangle far from the leading edge at x {}", x_min);
        }
    }
}
