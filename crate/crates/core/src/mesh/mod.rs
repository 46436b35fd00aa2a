//! Unstructured triangle meshes around deforming airfoils.
//!
//! Vertices carry a boundary marker; airfoil vertices additionally carry a
//! `(curve, t)` entry in the boundary map so that deformation can reposition
//! them by curve evaluation. Triangles are stored counterclockwise.

mod deform;
mod omesh;
mod refine;

pub use deform::{
    laplacian_smooth, level_smoothing_mask, repair_boundary_triangles, update_boundary,
    SurfaceCurves,
};
pub use omesh::generate_omesh;
pub use refine::{curvature_capture, refine_marked, uniform_refine, RefinementHierarchy};

use crate::error::{CoreError, Result};
use crate::geom::Point2;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Vertex classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Interior,
    Airfoil,
    Farfield,
}

/// Which surface curve a boundary vertex lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CurveId {
    Upper,
    Lower,
}

/// Curve attachment of an airfoil boundary vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub curve: CurveId,
    pub t: f64,
}

/// Triangle mesh with boundary metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct UnstructuredMesh {
    pub vertices: Vec<Point2>,
    /// CCW vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub markers: Vec<Marker>,
    /// Exactly the airfoil-marked vertices.
    pub boundary_map: BTreeMap<usize, BoundaryPoint>,
}

/// An interior edge as seen by a finite-volume scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorEdge {
    pub left: usize,
    pub right: usize,
    /// Unit normal pointing from `left` into `right`.
    pub normal: Point2,
    pub length: f64,
}

/// A boundary edge with its single adjacent cell and outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub cell: usize,
    pub a: usize,
    pub b: usize,
    pub normal: Point2,
    pub length: f64,
    pub marker: Marker,
}

/// Edge topology split into interior and boundary sides.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTopology {
    pub interior: Vec<InteriorEdge>,
    pub boundary: Vec<BoundaryEdge>,
}

/// Extremal angles (degrees) and smallest area over all triangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub min_area: f64,
}

pub(crate) fn triangle_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Smallest interior angle of a triangle, in degrees.
pub(crate) fn tri_min_angle_deg(a: Point2, b: Point2, c: Point2) -> f64 {
    let pts = [a, b, c];
    let mut min_angle = f64::INFINITY;
    for k in 0..3 {
        let u = pts[(k + 1) % 3] - pts[k];
        let v = pts[(k + 2) % 3] - pts[k];
        let ang = libm::atan2(libm::fabs(u.cross(v)), u.dot(v)).to_degrees();
        min_angle = min_angle.min(ang);
    }
    min_angle
}

impl UnstructuredMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        triangle_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn areas(&self) -> Vec<f64> {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.areas().iter().sum()
    }

    /// Triangles with non-positive signed area.
    pub fn inverted_triangles(&self) -> Vec<usize> {
        (0..self.n_triangles()).filter(|&t| self.signed_area(t) <= 0.0).collect()
    }

    /// Triangle lists per vertex, in triangle index order.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                adj[v].push(t);
            }
        }
        adj
    }

    /// Neighbor vertex lists, sorted, from edge connectivity.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.n_vertices()];
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                nb[a].push(b);
                nb[b].push(a);
            }
        }
        for list in nb.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        nb
    }

    /// Undirected edge map: (low, high) -> adjacent triangles (1 or 2).
    pub fn edge_triangles(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                map.entry(key).or_default().push(t);
            }
        }
        map
    }

    /// Splits edges into interior and boundary with finite-volume normals.
    ///
    /// Fails when an edge belongs to more than two triangles or a boundary
    /// edge has inconsistently marked endpoints.
    pub fn edges(&self) -> Result<EdgeTopology> {
        // Directed edge -> owning triangle resolves left/right orientation.
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                if directed.insert((a, b), t).is_some() {
                    return Err(CoreError::Mesh(format!(
                        "directed edge ({}, {}) appears twice; orientation broken",
                        a, b
                    )));
                }
            }
        }
        let mut undirected: Vec<(usize, usize)> =
            directed.keys().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        undirected.sort_unstable();
        undirected.dedup();
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for (lo, hi) in undirected {
            // Use whichever direction exists; for interior edges both do and
            // (a, b) is the one owned by the left triangle.
            let (a, b, t_ab) = match directed.get(&(lo, hi)) {
                Some(&t) => (lo, hi, t),
                None => (hi, lo, directed[&(hi, lo)]),
            };
            let pa = self.vertices[a];
            let pb = self.vertices[b];
            let d = pb - pa;
            let length = d.norm();
            if length == 0.0 {
                return Err(CoreError::Mesh(format!("zero-length edge ({}, {})", a, b)));
            }
            // Outward normal of the triangle owning a->b (interior on the left).
            let normal = Point2::new(d.y, -d.x) / length;
            match directed.get(&(b, a)) {
                Some(&t_ba) => {
                    interior.push(InteriorEdge { left: t_ab, right: t_ba, normal, length });
                }
                None => {
                    let marker = match (self.markers[a], self.markers[b]) {
                        (Marker::Airfoil, Marker::Airfoil) => Marker::Airfoil,
                        (Marker::Farfield, Marker::Farfield) => Marker::Farfield,
                        (ma, mb) => {
                            return Err(CoreError::Mesh(format!(
                                "boundary edge ({}, {}) has markers {:?}/{:?}",
                                a, b, ma, mb
                            )))
                        }
                    };
                    boundary.push(BoundaryEdge { cell: t_ab, a, b, normal, length, marker });
                }
            }
        }
        Ok(EdgeTopology { interior, boundary })
    }

    /// Characteristic cell size `2 * area / perimeter` (the inradius scale).
    pub fn cell_sizes(&self) -> Vec<f64> {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                let per = pa.dist(pb) + pb.dist(pc) + pc.dist(pa);
                2.0 * libm::fabs(triangle_area(pa, pb, pc)) / per
            })
            .collect()
    }

    pub fn quality_metrics(&self) -> QualityReport {
        let mut min_angle = f64::INFINITY;
        let mut max_angle = 0.0_f64;
        let mut min_area = f64::INFINITY;
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            min_area = min_area.min(self.signed_area(t));
            let pts = [self.vertices[a], self.vertices[b], self.vertices[c]];
            for k in 0..3 {
                let u = pts[(k + 1) % 3] - pts[k];
                let v = pts[(k + 2) % 3] - pts[k];
                let ang = libm::atan2(libm::fabs(u.cross(v)), u.dot(v)).to_degrees();
                min_angle = min_angle.min(ang);
                max_angle = max_angle.max(ang);
            }
        }
        QualityReport { min_angle_deg: min_angle, max_angle_deg: max_angle, min_area }
    }

    /// Level-1: non-airfoil vertices in triangles touching the airfoil.
    /// Level-2: remaining non-airfoil vertices in triangles touching level-1.
    pub fn classify_levels(&self) -> (Vec<usize>, Vec<usize>) {
        let is_airfoil: Vec<bool> =
            self.markers.iter().map(|&m| m == Marker::Airfoil).collect();
        let mut level1 = vec![false; self.n_vertices()];
        for tri in &self.triangles {
            if tri.iter().any(|&v| is_airfoil[v]) {
                for &v in tri {
                    if !is_airfoil[v] {
                        level1[v] = true;
                    }
                }
            }
        }
        let mut level2 = vec![false; self.n_vertices()];
        for tri in &self.triangles {
            if tri.iter().any(|&v| level1[v]) {
                for &v in tri {
                    if !is_airfoil[v] && !level1[v] {
                        level2[v] = true;
                    }
                }
            }
        }
        let collect = |flags: &[bool]| flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect();
        (collect(&level1), collect(&level2))
    }

    /// Structural validation: index ranges, positive areas, edge-manifoldness,
    /// boundary-map consistency.
    pub fn validate(&self) -> Result<()> {
        if self.markers.len() != self.n_vertices() {
            return Err(CoreError::Mesh("marker count != vertex count".into()));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= self.n_vertices() {
                    return Err(CoreError::Mesh(format!("triangle {} references vertex {}", t, v)));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(CoreError::Mesh(format!("triangle {} is degenerate", t)));
            }
            if self.signed_area(t) <= 0.0 {
                return Err(CoreError::Mesh(format!(
                    "triangle {} has non-positive area {}",
                    t,
                    self.signed_area(t)
                )));
            }
        }
        for (key, tris) in self.edge_triangles() {
            if tris.len() > 2 {
                return Err(CoreError::Mesh(format!(
                    "edge {:?} belongs to {} triangles",
                    key,
                    tris.len()
                )));
            }
        }
        self.edges()?;
        for (v, &m) in self.markers.iter().enumerate() {
            let mapped = self.boundary_map.contains_key(&v);
            if (m == Marker::Airfoil) != mapped {
                return Err(CoreError::Mesh(format!(
                    "vertex {} marker {:?} inconsistent with boundary map",
                    v, m
                )));
            }
        }
        for bp in self.boundary_map.values() {
            if !(0.0..=1.0).contains(&bp.t) {
                return Err(CoreError::Mesh(format!("boundary parameter {} outside [0, 1]", bp.t)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Structured triangulation of the unit square with all-farfield border,
    /// for solver tests that need a mesh without an airfoil.
    pub fn unit_square(n: usize) -> UnstructuredMesh {
        let mut vertices = Vec::new();
        let mut markers = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point2::new(i as f64 / n as f64, j as f64 / n as f64));
                let on_border = i == 0 || j == 0 || i == n || j == n;
                markers.push(if on_border { Marker::Farfield } else { Marker::Interior });
            }
        }
        let v = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        UnstructuredMesh { vertices, triangles, markers, boundary_map: BTreeMap::new() }
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::unit_square;
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_square_mesh_is_valid_with_unit_area() {
        let mesh = unit_square(4);
        mesh.validate().unwrap();
        assert_relative_eq!(mesh.total_area(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn edge_normals_point_from_left_to_right() {
        let mesh = unit_square(2);
        let topo = mesh.edges().unwrap();
        for e in &topo.interior {
            assert_relative_eq!(e.normal.norm(), 1.0, epsilon = 1e-14);
            // The normal must separate the two cell centroids correctly.
            let centroid = |t: usize| {
                let [a, b, c] = mesh.triangles[t];
                (mesh.vertices[a] + mesh.vertices[b] + mesh.vertices[c]) / 3.0
            };
            let d = centroid(e.right) - centroid(e.left);
            assert!(d.dot(e.normal) > 0.0);
        }
        for e in &topo.boundary {
            assert_eq!(e.marker, Marker::Farfield);
            assert_relative_eq!(e.normal.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn boundary_edge_normals_sum_to_zero_on_a_closed_border() {
        let mesh = unit_square(3);
        let topo = mesh.edges().unwrap();
        let total = topo
            .boundary
            .iter()
            .fold(Point2::default(), |acc, e| acc + e.normal * e.length);
        assert!(total.norm() < 1e-13);
    }

    #[test]
    fn quality_of_right_isoceles_grid() {
        let mesh = unit_square(3);
        let q = mesh.quality_metrics();
        assert_relative_eq!(q.min_angle_deg, 45.0, epsilon = 1e-9);
        assert_relative_eq!(q.max_angle_deg, 90.0, epsilon = 1e-9);
        assert_relative_eq!(q.min_area, 1.0 / 18.0, epsilon = 1e-12);
    }

    #[test]
    fn validation_rejects_flipped_triangles() {
        let mut mesh = unit_square(2);
        mesh.triangles[0].swap(0, 1);
        assert!(mesh.validate().is_err());
    }
}
