//! Airfoil geometry: Bezier parameterization, sample-point shapes,
//! deformation actions and discrete curvature.

mod bezier;
mod curvature;
mod shape;

pub use bezier::{
    chord_length_params, fit_bezier, fit_bezier_regularized, fit_bezier_with, BezierCurve,
    FitOptions,
};
pub use curvature::{discrete_curvature, turning_angles};
pub use shape::{
    action_bump, apply_action, check_thickness, naca4_init, AirfoilShape, DeformAction,
    ThicknessReport, ThicknessViolation,
};

use core::ops::{Add, Div, Mul, Neg, Sub};

/// A point or vector in the chord-normalized plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, positive for a left turn.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction; zero vectors are returned as-is.
    pub fn normalized(self) -> Point2 {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self / n
        }
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Point2 {
    type Output = Point2;
    fn div(self, s: f64) -> Point2 {
        Point2::new(self.x / s, self.y / s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}
