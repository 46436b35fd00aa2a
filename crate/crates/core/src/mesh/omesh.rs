//! O-mesh generation: radially graded triangle layers from the airfoil
//! boundary out to a circular far field.
//!
//! The generator marches a few rings off the wall along smoothed vertex
//! normals, then fills the rest of the annulus with transfinite interpolation
//! between the last marched ring and the far-field circle. Radial spacing is
//! geometric per column near the wall and blends toward a shared ring-average
//! profile outward, which keeps cells isotropic over the cosine-clustered
//! leading edge without shearing columns against their neighbors.

use super::{triangle_area, tri_min_angle_deg, BoundaryPoint, CurveId, Marker, UnstructuredMesh};
use crate::config::MeshConfig;
use crate::error::{CoreError, Result};
use crate::geom::{chord_length_params, AirfoilShape, Point2};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

/// Far-field circle center: mid-chord, so the annulus is concentric with the
/// airfoil rather than with its leading edge.
pub(crate) const CIRCLE_CENTER: Point2 = Point2 { x: 0.5, y: 0.0 };

/// Rings advanced by the normal march before switching to transfinite
/// interpolation.
const MARCH_RINGS: usize = 5;
/// Arc-slide relaxation length: columns re-center toward uniform angular
/// spacing once the radial step exceeds this scale.
const SLIDE_SCALE: f64 = 0.6;
/// Neighbor cap on the first-layer height ratio along the wall.
const LATERAL_RATIO_CAP: f64 = 1.3;
/// Smoothstep ramp bounds (in TFI ring index) for blending per-column radial
/// profiles toward the ring-average profile.
const BLEND_START: usize = 2;
const BLEND_END_FRACTION: f64 = 0.55;
/// Jacobi weight and pass count for smoothing each marched ring.
const MARCH_SMOOTH_WEIGHT: f64 = 0.25;
const MARCH_SMOOTH_PASSES: usize = 1;

/// Solves for the geometric growth factor g with
/// `h * (g^n - 1) / (g - 1) = total`, i.e. n layers starting at thickness h
/// that exactly cover `total`.
fn solve_growth(h: f64, total: f64, n: usize) -> f64 {
    debug_assert!(h > 0.0 && total > 0.0 && n > 0);
    let sum = |g: f64| -> f64 {
        // sum_{k=0}^{n-1} g^k, stable for g near 1.
        let mut acc = 0.0;
        let mut p = 1.0;
        for _ in 0..n {
            acc += p;
            p *= g;
        }
        acc
    };
    let (mut lo, mut hi) = (1e-3, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h * sum(mid) < total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Quality of both diagonal splits of the quad `a, b, c, d` (inner i, inner
/// i+1, outer i+1, outer i): the minimum angle of the worse triangle in
/// degrees, or -1 when the split contains a non-positive triangle.
fn split_qualities(a: Point2, b: Point2, c: Point2, d: Point2) -> (f64, f64) {
    let pair = |t1: (Point2, Point2, Point2), t2: (Point2, Point2, Point2)| {
        let angle = |(p, q, r): (Point2, Point2, Point2)| {
            if triangle_area(p, q, r) <= 0.0 {
                -1.0
            } else {
                tri_min_angle_deg(p, q, r)
            }
        };
        let (q1, q2) = (angle(t1), angle(t2));
        if q1 < 0.0 || q2 < 0.0 {
            -1.0
        } else {
            q1.min(q2)
        }
    };
    (pair((a, c, b), (a, d, c)), pair((a, d, b), (b, d, c)))
}

/// Outward unit normals of a closed CCW ring: normalized sum of the two
/// adjacent edge normals (each tangent rotated -90 degrees).
fn vertex_normals(ring: &[Point2]) -> Vec<Point2> {
    let nb = ring.len();
    let mut out = Vec::with_capacity(nb);
    for i in 0..nb {
        let pm = ring[(i + nb - 1) % nb];
        let p0 = ring[i];
        let pp = ring[(i + 1) % nb];
        let n1 = Point2::new(p0.y - pm.y, pm.x - p0.x).normalized();
        let n2 = Point2::new(pp.y - p0.y, p0.x - pp.x).normalized();
        let v = n1 + n2;
        let lv = v.norm();
        out.push(if lv > 1e-12 { v / lv } else { n1 });
    }
    out
}

fn segment_lengths(ring: &[Point2]) -> Vec<f64> {
    let nb = ring.len();
    (0..nb).map(|i| ring[i].dist(ring[(i + 1) % nb])).collect()
}

/// Piecewise-linear point at arc fraction `tau` along a closed ring.
fn ring_point(base: &[Point2], seg: &[f64], perimeter: f64, tau: f64) -> Point2 {
    let tau = tau - libm::floor(tau);
    let target = tau * perimeter;
    let mut acc = 0.0;
    for (i, &len) in seg.iter().enumerate() {
        if acc + len >= target - 1e-15 {
            let f = (target - acc) / len;
            let p = base[i];
            let q = base[(i + 1) % base.len()];
            return p + (q - p) * f;
        }
        acc += len;
    }
    base[0]
}

/// Point at arc fraction `tau` on the far-field circle, measured CCW from the
/// positive x axis so that `tau = 0` faces the trailing edge.
fn circle_point(radius: f64, tau: f64) -> Point2 {
    let th = 2.0 * core::f64::consts::PI * tau;
    CIRCLE_CENTER + Point2::new(radius * libm::cos(th), radius * libm::sin(th))
}

/// Builds an O-mesh around the shape.
///
/// Ring 0 is the boundary polygon of the shape (one vertex per distinct
/// sample point). The first [`MARCH_RINGS`] rings advance along smoothed
/// vertex normals with per-column geometric steps whose first layer matches
/// the local wall spacing; the remaining rings come from transfinite
/// interpolation between the last marched ring and the far-field circle of
/// `config.radius` around [`CIRCLE_CENTER`]. Each quad between consecutive
/// rings splits along whichever diagonal maximizes the smaller minimum angle
/// of the two resulting triangles.
pub fn generate_omesh(shape: &AirfoilShape, config: &MeshConfig) -> Result<UnstructuredMesh> {
    let n_layers = config.n_layers;
    if n_layers < 2 {
        return Err(CoreError::domain("O-mesh needs at least 2 layers"));
    }
    // Coarse test meshes with few layers shorten the march so that at least
    // two TFI rings remain.
    let march_rings = MARCH_RINGS.min(n_layers - 2);
    let poly = shape.boundary_polygon();
    let nb = poly.len();
    let m = shape.points_per_surface();
    let radius = config.radius;
    for p in &poly {
        if p.dist(CIRCLE_CENTER) >= radius {
            return Err(CoreError::domain("shape extends beyond the far-field circle"));
        }
    }

    // Chord-length parameters per surface feed the boundary map, mirroring
    // the polygon layout: [TE, upper reversed ... LE, lower ...).
    let tu = chord_length_params(shape.upper())?;
    let tl = chord_length_params(shape.lower())?;
    let mut boundary_points = Vec::with_capacity(nb);
    for i in (1..m).rev() {
        boundary_points.push(BoundaryPoint { curve: CurveId::Upper, t: tu[i] });
    }
    boundary_points.push(BoundaryPoint { curve: CurveId::Upper, t: 0.0 });
    for i in 1..m - 1 {
        boundary_points.push(BoundaryPoint { curve: CurveId::Lower, t: tl[i] });
    }

    // First-layer height per column: min adjacent wall spacing, then capped
    // so adjacent columns never differ by more than LATERAL_RATIO_CAP. The
    // cap iterates to a fixpoint because lowering one column can expose a
    // violation at its neighbor.
    let seg = segment_lengths(&poly);
    let mut h: Vec<f64> = (0..nb).map(|i| seg[(i + nb - 1) % nb].min(seg[i])).collect();
    for _ in 0..nb {
        let mut changed = false;
        for i in 0..nb {
            let cap = LATERAL_RATIO_CAP * h[(i + nb - 1) % nb].min(h[(i + 1) % nb]);
            if h[i] > cap + 1e-15 {
                h[i] = cap;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let g0: Vec<f64> = (0..nb)
        .map(|i| solve_growth(h[i], radius - poly[i].dist(CIRCLE_CENTER), n_layers))
        .collect();

    // Normal march for the near-wall rings. Each ring takes the next
    // geometric step along the smoothed vertex normals of the previous ring,
    // then one light Jacobi pass rounds off concave kinks before they
    // amplify outward. The march stops early if a candidate ring would leave
    // some quad without a positively oriented split (per-column growth
    // factors diverge when few layers cover the annulus) or would not leave
    // the transfinite fill room for its own first layer.
    let mut rings: Vec<Vec<Point2>> = Vec::with_capacity(n_layers + 1);
    rings.push(poly.clone());
    let mut cur = poly.clone();
    for k in 0..march_rings {
        let normals = vertex_normals(&cur);
        let mut next: Vec<Point2> = (0..nb)
            .map(|i| cur[i] + normals[i] * (h[i] * libm::pow(g0[i], k as f64)))
            .collect();
        for _ in 0..MARCH_SMOOTH_PASSES {
            let snapshot = next.clone();
            for i in 0..nb {
                let mid = (snapshot[(i + nb - 1) % nb] + snapshot[(i + 1) % nb]) * 0.5;
                next[i] = snapshot[i] + (mid - snapshot[i]) * MARCH_SMOOTH_WEIGHT;
            }
        }
        let acceptable = (0..nb).all(|i| {
            let j = (i + 1) % nb;
            let (q1, q2) = split_qualities(cur[i], cur[j], next[j], next[i]);
            let room = radius - next[i].dist(CIRCLE_CENTER)
                > 2.0 * h[i] * libm::pow(g0[i], (k + 1) as f64);
            (q1 > 0.0 || q2 > 0.0) && room
        });
        if !acceptable {
            break;
        }
        rings.push(next.clone());
        cur = next;
    }
    let march_done = rings.len() - 1;

    // Transfinite interpolation from the last marched ring to the circle.
    // Radial profiles start per-column geometric (continuing each column's
    // step height) and blend toward the ring-average log profile through a
    // smoothstep ramp; a slide factor simultaneously re-centers columns from
    // wall arc fractions toward uniform angular spacing as the radial steps
    // grow past SLIDE_SCALE.
    let base = cur;
    let segb = segment_lengths(&base);
    let perimeter: f64 = segb.iter().sum();
    let mut sigma = Vec::with_capacity(nb);
    sigma.push(0.0);
    for i in 0..nb - 1 {
        let prev = sigma[i];
        sigma.push(prev + segb[i] / perimeter);
    }
    let rem: Vec<f64> = base.iter().map(|p| radius - p.dist(CIRCLE_CENTER)).collect();
    let n_rest = n_layers - march_done;
    let hb: Vec<f64> = (0..nb).map(|i| h[i] * libm::pow(g0[i], march_done as f64)).collect();
    let g: Vec<f64> = (0..nb).map(|i| solve_growth(hb[i], rem[i], n_rest)).collect();

    // rho[k][i]: cumulative radial distance of TFI ring k on column i under
    // pure per-column grading; lbar[k] is its ring-average log.
    let mut rho = alloc::vec![alloc::vec![0.0_f64; nb]; n_rest + 1];
    for i in 0..nb {
        let mut acc = 0.0;
        let mut step = hb[i];
        for k in 1..=n_rest {
            acc += step;
            step *= g[i];
            rho[k][i] = acc;
        }
    }
    let lbar: Vec<f64> = (0..=n_rest)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                rho[k].iter().map(|&r| libm::log(r.max(1e-300))).sum::<f64>() / nb as f64
            }
        })
        .collect();
    let blend_end = (BLEND_START + 6).max((n_rest as f64 * BLEND_END_FRACTION) as usize);

    let mut prev_r = alloc::vec![0.0_f64; nb];
    for k in 1..=n_rest {
        let t = (k as f64 - BLEND_START as f64) / (blend_end - BLEND_START) as f64;
        let w = if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            t * t * (3.0 - 2.0 * t)
        };
        let mut ring = Vec::with_capacity(nb);
        let mut curr_r = Vec::with_capacity(nb);
        for i in 0..nb {
            let lr = (1.0 - w) * libm::log(rho[k][i]) + w * lbar[k];
            // Monotone guard: each ring must clear the previous by 2% even
            // where the log blend would locally contract.
            let r = libm::exp(lr).max(prev_r[i] * 1.02 + 1e-9);
            curr_r.push(r);
            let nu = if k == n_rest { 1.0 } else { (r / rem[i]).min(1.0) };
            let mu = r / (r + SLIDE_SCALE);
            let tau = (1.0 - mu) * sigma[i] + mu * (i as f64 / nb as f64);
            let wall = ring_point(&base, &segb, perimeter, tau);
            let far = circle_point(radius, tau);
            ring.push(wall * (1.0 - nu) + far * nu);
        }
        prev_r = curr_r;
        rings.push(ring);
    }

    let mut vertices = Vec::with_capacity((n_layers + 1) * nb);
    let mut markers = Vec::with_capacity((n_layers + 1) * nb);
    for (k, ring) in rings.iter().enumerate() {
        let marker = if k == 0 {
            Marker::Airfoil
        } else if k == n_layers {
            Marker::Farfield
        } else {
            Marker::Interior
        };
        for &p in ring {
            vertices.push(p);
            markers.push(marker);
        }
    }

    let vid = |ring: usize, i: usize| ring * nb + i; // ring 0 = airfoil polygon
    let mut triangles = Vec::with_capacity(2 * nb * n_layers);
    for k in 0..n_layers {
        for i in 0..nb {
            let j = (i + 1) % nb;
            let a = vid(k, i);
            let b = vid(k, j);
            let c = vid(k + 1, j);
            let d = vid(k + 1, i);
            // Pick the diagonal whose worse triangle has the larger minimum
            // angle.
            let (q_ac, q_bd) = split_qualities(vertices[a], vertices[b], vertices[c], vertices[d]);
            let (t1, t2) = if q_ac >= q_bd {
                ([a, c, b], [a, d, c])
            } else {
                ([a, d, b], [b, d, c])
            };
            triangles.push(t1);
            triangles.push(t2);
        }
    }

    let mut boundary_map = BTreeMap::new();
    for (i, bp) in boundary_points.into_iter().enumerate() {
        boundary_map.insert(i, bp);
    }
    let mesh = UnstructuredMesh { vertices, triangles, markers, boundary_map };
    for (t, &[a, b, c]) in mesh.triangles.iter().enumerate() {
        let area = triangle_area(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        if area <= 0.0 {
            return Err(CoreError::Mesh(format!(
                "generated triangle {} has area {}; shape too irregular for O-mesh",
                t, area
            )));
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::naca4_init;

    #[test]
    fn growth_factor_solves_coverage() {
        for &(h, total, n) in &[(0.02, 35.0, 24), (0.001, 35.0, 24), (0.5, 1.0, 4)] {
            let g = solve_growth(h, total, n);
            let mut acc = 0.0;
            let mut p = 1.0;
            for _ in 0..n {
                acc += p;
                p *= g;
            }
            assert!((h * acc - total).abs() / total < 1e-9, "g = {}", g);
        }
    }

    #[test]
    fn omesh_counts_and_validity() {
        let shape = naca4_init(0.12, 132).unwrap();
        let config = MeshConfig::default();
        let mesh = generate_omesh(&shape, &config).unwrap();
        mesh.validate().unwrap();
        let nb = shape.boundary_polygon().len();
        assert_eq!(nb, 130);
        assert_eq!(mesh.n_vertices(), nb * (config.n_layers + 1));
        assert_eq!(mesh.n_triangles(), 2 * nb * config.n_layers);
        let airfoil_count =
            mesh.markers.iter().filter(|&&m| m == Marker::Airfoil).count();
        assert_eq!(airfoil_count, nb);
    }

    #[test]
    fn farfield_ring_sits_on_the_circle() {
        let shape = naca4_init(0.12, 64).unwrap();
        let config = MeshConfig { radius: 35.0, n_layers: 12, ..MeshConfig::default() };
        let mesh = generate_omesh(&shape, &config).unwrap();
        for (v, &m) in mesh.markers.iter().enumerate() {
            if m == Marker::Farfield {
                let r = mesh.vertices[v].dist(CIRCLE_CENTER);
                assert!((r - 35.0).abs() < 1e-9, "farfield vertex at distance {}", r);
            }
        }
    }

    #[test]
    fn default_mesh_quality_is_comfortable() {
        let shape = naca4_init(0.12, 132).unwrap();
        let mesh = generate_omesh(&shape, &MeshConfig::default()).unwrap();
        let q = mesh.quality_metrics();
        assert!(q.min_angle_deg > 12.0, "min angle {}", q.min_angle_deg);
        assert!(q.min_area > 0.0);
    }

    #[test]
    fn boundary_map_parameters_evaluate_back_to_the_polygon() {
        use crate::mesh::deform::SurfaceCurves;
        let shape = naca4_init(0.12, 132).unwrap();
        let mesh = generate_omesh(&shape, &MeshConfig::default()).unwrap();
        let curves = SurfaceCurves::fit(&shape, 16, 3e-4).unwrap();
        for (&v, bp) in &mesh.boundary_map {
            let p = curves.point(bp.curve, bp.t).unwrap();
            // The degree-16 fit tracks NACA0012 samples to sub-millichord
            // accuracy, so mapped positions must agree to that scale.
            assert!(
                p.dist(mesh.vertices[v]) < 2e-3,
                "vertex {} maps {} away",
                v,
                p.dist(mesh.vertices[v])
            );
        }
    }
}
