//! Sample-point airfoil shapes, the NACA 4-digit initializer, Gaussian bump
//! deformation actions and the thickness constraint.

use super::Point2;
use crate::config::GeometryConfig;
use crate::error::{CoreError, Result};
use alloc::format;
use alloc::vec::Vec;

/// An airfoil described by sample points on its upper and lower surfaces.
///
/// Both arrays run leading edge to trailing edge with strictly ascending x
/// and equal length; the two surfaces share their first and last points, and
/// at every interior station the upper surface is at or above the lower one.
#[derive(Debug, Clone, PartialEq)]
pub struct AirfoilShape {
    upper: Vec<Point2>,
    lower: Vec<Point2>,
}

impl AirfoilShape {
    pub fn new(upper: Vec<Point2>, lower: Vec<Point2>) -> Result<Self> {
        if upper.len() < 3 || upper.len() != lower.len() {
            return Err(CoreError::domain(
                "surfaces need equal point counts of at least 3",
            ));
        }
        for surf in [&upper, &lower] {
            for w in surf.windows(2) {
                if w[1].x <= w[0].x {
                    return Err(CoreError::domain(format!(
                        "surface x must be strictly ascending ({} then {})",
                        w[0].x, w[1].x
                    )));
                }
            }
        }
        let m = upper.len();
        if upper[0].dist(lower[0]) > 1e-9 || upper[m - 1].dist(lower[m - 1]) > 1e-9 {
            return Err(CoreError::domain("leading/trailing edge points must be shared"));
        }
        for i in 0..m {
            if upper[i].y < lower[i].y - 1e-12 {
                return Err(CoreError::domain(format!(
                    "surfaces cross near x = {}",
                    0.5 * (upper[i].x + lower[i].x)
                )));
            }
        }
        Ok(AirfoilShape { upper, lower })
    }

    pub fn upper(&self) -> &[Point2] {
        &self.upper
    }

    pub fn lower(&self) -> &[Point2] {
        &self.lower
    }

    /// Points per surface.
    pub fn points_per_surface(&self) -> usize {
        self.upper.len()
    }

    pub fn leading_edge(&self) -> Point2 {
        self.upper[0]
    }

    pub fn trailing_edge(&self) -> Point2 {
        self.upper[self.upper.len() - 1]
    }

    /// Thickness y_upper - y_lower at every station, paired by index.
    pub fn thickness_distribution(&self) -> Vec<(f64, f64)> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| (0.5 * (u.x + l.x), u.y - l.y))
            .collect()
    }

    /// The closed boundary polygon, counterclockwise around the body:
    /// trailing edge, upper surface back to the leading edge, then the lower
    /// surface forward. Shared endpoints appear once, so the polygon has
    /// `2 * points_per_surface - 2` distinct vertices.
    pub fn boundary_polygon(&self) -> Vec<Point2> {
        let m = self.upper.len();
        let mut poly = Vec::with_capacity(2 * m - 2);
        for i in (1..m).rev() {
            poly.push(self.upper[i]);
        }
        poly.push(self.upper[0]);
        for i in 1..m - 1 {
            poly.push(self.lower[i]);
        }
        poly
    }
}

/// Standard symmetric NACA 4-digit thickness polynomial (half thickness).
fn naca4_half_thickness(tau: f64, x: f64) -> f64 {
    5.0 * tau
        * (0.2969 * libm::sqrt(x) - 0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x
            - 0.1015 * x * x * x * x)
}

/// Builds a symmetric NACA 4-digit airfoil of the given thickness ratio with
/// `n_points` samples total, split evenly between the surfaces at chord
/// stations `x_k = 1 - cos(pi k / (2 (m - 1)))`, which cluster toward the
/// curved leading edge while keeping trailing-edge spacing coarse enough that
/// bounded surface deformations cannot crush the first mesh layer.
///
/// The open trailing edge of the raw polynomial is closed by subtracting the
/// linear wedge `x * y_t(1)`, so both surfaces end at exactly (1, 0).
pub fn naca4_init(thickness: f64, n_points: usize) -> Result<AirfoilShape> {
    if thickness <= 0.0 || thickness >= 1.0 {
        return Err(CoreError::domain("thickness ratio must be in (0, 1)"));
    }
    if n_points < 8 || n_points % 2 != 0 {
        return Err(CoreError::domain("n_points must be even and at least 8"));
    }
    let m = n_points / 2;
    let te_offset = naca4_half_thickness(thickness, 1.0);
    let mut upper = Vec::with_capacity(m);
    let mut lower = Vec::with_capacity(m);
    for k in 0..m {
        // The float cosine near pi/2 misses zero by an ulp, which would put
        // the last station off x = 1 and give the closed TE a signed
        // thickness; land it exactly.
        let x = if k + 1 == m {
            1.0
        } else {
            1.0 - libm::cos(core::f64::consts::PI * k as f64 / (2.0 * (m - 1) as f64))
        };
        let yt = naca4_half_thickness(thickness, x) - x * te_offset;
        upper.push(Point2::new(x, yt));
        lower.push(Point2::new(x, -yt));
    }
    AirfoilShape::new(upper, lower)
}

/// Gaussian influence of an action centered at `x_target` with width `delta`:
/// `SA(x) = exp(-(x - x_target)^2 / (2 delta^2))`.
pub fn action_bump(x: f64, x_target: f64, delta: f64) -> f64 {
    let d = x - x_target;
    libm::exp(-d * d / (2.0 * delta * delta))
}

/// A smooth local deformation: both surfaces shift vertically by their own
/// amplitude times the shared Gaussian bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformAction {
    pub x_target: f64,
    pub y_upper: f64,
    pub y_lower: f64,
    pub delta: f64,
}

impl DeformAction {
    /// The action with both displacement signs flipped.
    pub fn opposite(self) -> DeformAction {
        DeformAction { y_upper: -self.y_upper, y_lower: -self.y_lower, ..self }
    }

    /// Checks the action against the configured bounds.
    pub fn validate(&self, geo: &GeometryConfig) -> Result<()> {
        if !(0.0..=1.0).contains(&self.x_target) {
            return Err(CoreError::domain(format!("x_target {} outside [0, 1]", self.x_target)));
        }
        if libm::fabs(self.y_upper) > geo.max_step || libm::fabs(self.y_lower) > geo.max_step {
            return Err(CoreError::domain(format!(
                "displacement exceeds max_step {}",
                geo.max_step
            )));
        }
        if self.delta < geo.delta_min || self.delta > geo.delta_max {
            return Err(CoreError::domain(format!(
                "delta {} outside [{}, {}]",
                self.delta, geo.delta_min, geo.delta_max
            )));
        }
        Ok(())
    }
}

/// Applies the Gaussian bump to every interior station; the shared leading
/// and trailing edge points stay fixed so the surfaces remain joined.
///
/// Returns a rejected-action error when the displaced surfaces would cross;
/// the caller decides the penalty.
pub fn apply_action(shape: &AirfoilShape, action: &DeformAction) -> Result<AirfoilShape> {
    let m = shape.points_per_surface();
    let mut upper = shape.upper().to_vec();
    let mut lower = shape.lower().to_vec();
    for i in 1..m - 1 {
        upper[i].y += action.y_upper * action_bump(upper[i].x, action.x_target, action.delta);
        lower[i].y += action.y_lower * action_bump(lower[i].x, action.x_target, action.delta);
    }
    for i in 0..m {
        if upper[i].y < lower[i].y - 1e-12 {
            return Err(CoreError::RejectedAction(format!(
                "deformed surfaces cross near x = {}",
                0.5 * (upper[i].x + lower[i].x)
            )));
        }
    }
    AirfoilShape::new(upper, lower)
        .map_err(|e| CoreError::RejectedAction(format!("deformed shape invalid: {}", e)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThicknessViolation {
    pub x: f64,
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThicknessReport {
    pub pass: bool,
    pub violations: Vec<ThicknessViolation>,
}

/// Checks `y_upper - y_lower >= min_thickness` at every station whose x lies
/// inside one of the closed `ranges`.
pub fn check_thickness(
    shape: &AirfoilShape,
    min_thickness: f64,
    ranges: &[(f64, f64)],
) -> ThicknessReport {
    let mut violations = Vec::new();
    for (x, th) in shape.thickness_distribution() {
        let constrained = ranges.iter().any(|&(lo, hi)| x >= lo && x <= hi);
        if constrained && th < min_thickness {
            violations.push(ThicknessViolation { x, thickness: th });
        }
    }
    ThicknessReport { pass: violations.is_empty(), violations }
}
