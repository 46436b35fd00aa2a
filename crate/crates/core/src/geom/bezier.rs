//! Bezier curves over airfoil surfaces and their least-squares fits.
//!
//! A surface curve runs from the leading edge (t = 0) to the trailing edge
//! (t = 1). Control-point x-coordinates are required to be non-decreasing so
//! that x(t) is monotone and x can be inverted for a parameter.

use super::Point2;
use crate::error::{CoreError, Result};
use crate::linalg::cholesky_solve;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

/// Polynomial curve `B(t) = sum_i C(n,i) (1-t)^(n-i) t^i CP_i` with monotone
/// control-point x.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierCurve {
    control: Vec<Point2>,
}

impl BezierCurve {
    /// Validates degree >= 1 and non-decreasing control-point x.
    pub fn new(control: Vec<Point2>) -> Result<Self> {
        if control.len() < 2 {
            return Err(CoreError::domain("Bezier curve needs at least 2 control points"));
        }
        for w in control.windows(2) {
            if w[1].x < w[0].x {
                return Err(CoreError::domain(format!(
                    "control-point x must be non-decreasing ({} then {})",
                    w[0].x, w[1].x
                )));
            }
        }
        Ok(BezierCurve { control })
    }

    pub fn degree(&self) -> usize {
        self.control.len() - 1
    }

    pub fn control_points(&self) -> &[Point2] {
        &self.control
    }

    /// Evaluates the curve at `t` in [0, 1].
    pub fn point(&self, t: f64) -> Result<Point2> {
        if !(0.0..=1.0).contains(&t) {
            return Err(CoreError::domain(format!("parameter {} outside [0, 1]", t)));
        }
        let basis = bernstein_basis(self.degree(), t);
        let mut p = Point2::default();
        for (b, cp) in basis.iter().zip(&self.control) {
            p = p + *cp * *b;
        }
        Ok(p)
    }

    /// Finds t with x(B(t)) = x by bisection on the monotone x(t).
    ///
    /// `x` must lie within [x(0), x(1)]. The result satisfies
    /// |x(B(t)) - x| <= 1e-10.
    pub fn inverse_param(&self, x: f64) -> Result<f64> {
        let x0 = self.control[0].x;
        let x1 = self.control[self.control.len() - 1].x;
        if x < x0 - 1e-12 || x > x1 + 1e-12 {
            return Err(CoreError::domain(format!("x = {} outside curve range [{}, {}]", x, x0, x1)));
        }
        let x = x.clamp(x0, x1);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.point(mid)?.x < x {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// All degree-n Bernstein basis values at `t`, by the stable in-place
/// recurrence (no explicit binomials).
pub fn bernstein_basis(n: usize, t: f64) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    let s = 1.0 - t;
    for j in 1..=n {
        b[j] = t * b[j - 1];
        for i in (1..j).rev() {
            b[i] = t * b[i - 1] + s * b[i];
        }
        b[0] *= s;
    }
    b
}

/// Normalized chord-length parameters: t_0 = 0, t_last = 1, increments
/// proportional to distances between consecutive samples.
pub fn chord_length_params(samples: &[Point2]) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(CoreError::domain("need at least 2 samples"));
    }
    let mut t = vec![0.0; samples.len()];
    for i in 1..samples.len() {
        t[i] = t[i - 1] + samples[i].dist(samples[i - 1]);
    }
    let total = t[samples.len() - 1];
    if total == 0.0 {
        return Err(CoreError::domain("all samples coincide"));
    }
    for ti in t.iter_mut() {
        *ti /= total;
    }
    Ok(t)
}

/// Options for the least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Weight on the squared second differences of the control polygon.
    pub lambda_s: f64,
    /// Fix CP_0 and CP_n to the first and last sample. Used by the
    /// deformation pipeline to keep the two surface curves joined at the
    /// leading and trailing edges.
    pub pin_endpoints: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { lambda_s: 0.0, pin_endpoints: false }
    }
}

/// Plain least-squares fit with chord-length parameters.
pub fn fit_bezier(samples: &[Point2], degree: usize) -> Result<BezierCurve> {
    fit_bezier_with(samples, degree, None, FitOptions::default())
}

/// Fit with the second-difference regularization
/// `min sum_j ||B(t_j) - sp_j||^2 + lambda_s sum_i ||CP_{i-1} - 2 CP_i + CP_{i+1}||^2`.
pub fn fit_bezier_regularized(
    samples: &[Point2],
    degree: usize,
    lambda_s: f64,
) -> Result<BezierCurve> {
    fit_bezier_with(samples, degree, None, FitOptions { lambda_s, pin_endpoints: false })
}

/// Full-control fit: explicit parameters (chord-length when `None`),
/// regularization weight, optional endpoint pinning.
///
/// Requires at least `degree + 1` samples; a rank-deficient normal system
/// (for example from duplicated samples) is a fit error, as is a fitted
/// control polygon with non-monotone x.
pub fn fit_bezier_with(
    samples: &[Point2],
    degree: usize,
    params: Option<&[f64]>,
    opts: FitOptions,
) -> Result<BezierCurve> {
    let m = samples.len();
    let n = degree;
    if n < 1 {
        return Err(CoreError::domain("fit degree must be >= 1"));
    }
    if m < n + 1 {
        return Err(CoreError::domain(format!("{} samples cannot determine degree {}", m, n)));
    }
    if opts.lambda_s < 0.0 {
        return Err(CoreError::domain("lambda_s must be >= 0"));
    }
    let owned;
    let t: &[f64] = match params {
        Some(p) => {
            if p.len() != m {
                return Err(CoreError::domain("parameter count must match sample count"));
            }
            p
        }
        None => {
            owned = chord_length_params(samples)?;
            &owned
        }
    };

    // Normal matrix N = Phi^T Phi + lambda D^T D, shared by both coordinates.
    let nc = n + 1;
    let mut nmat = vec![0.0; nc * nc];
    let mut rhs_x = vec![0.0; nc];
    let mut rhs_y = vec![0.0; nc];
    for (j, &tj) in t.iter().enumerate() {
        let basis = bernstein_basis(n, tj.clamp(0.0, 1.0));
        for a in 0..nc {
            rhs_x[a] += basis[a] * samples[j].x;
            rhs_y[a] += basis[a] * samples[j].y;
            for b in 0..nc {
                nmat[a * nc + b] += basis[a] * basis[b];
            }
        }
    }
    if opts.lambda_s > 0.0 {
        // Row i of D is [1, -2, 1] at columns i-1, i, i+1.
        for i in 1..n {
            let cols = [i - 1, i, i + 1];
            let coef = [1.0, -2.0, 1.0];
            for (ca, &a) in cols.iter().enumerate() {
                for (cb, &b) in cols.iter().enumerate() {
                    nmat[a * nc + b] += opts.lambda_s * coef[ca] * coef[cb];
                }
            }
        }
    }

    let solve_coord = |rhs: &[f64], data_first: f64, data_last: f64| -> Result<Vec<f64>> {
        if !opts.pin_endpoints {
            return cholesky_solve(nmat.clone(), nc, rhs);
        }
        // Eliminate CP_0 and CP_n, solving the reduced SPD system for the
        // interior control points.
        let free = nc - 2;
        if free == 0 {
            return Ok(vec![data_first, data_last]);
        }
        let mut red = vec![0.0; free * free];
        let mut rrhs = vec![0.0; free];
        for a in 0..free {
            let ga = a + 1;
            rrhs[a] = rhs[ga] - nmat[ga * nc] * data_first - nmat[ga * nc + nc - 1] * data_last;
            for b in 0..free {
                red[a * free + b] = nmat[ga * nc + b + 1];
            }
        }
        let interior = cholesky_solve(red, free, &rrhs)?;
        let mut full = Vec::with_capacity(nc);
        full.push(data_first);
        full.extend_from_slice(&interior);
        full.push(data_last);
        Ok(full)
    };

    let cx = solve_coord(&rhs_x, samples[0].x, samples[m - 1].x)?;
    let cy = solve_coord(&rhs_y, samples[0].y, samples[m - 1].y)?;
    let control: Vec<Point2> = cx.iter().zip(&cy).map(|(&x, &y)| Point2::new(x, y)).collect();
    BezierCurve::new(control)
        .map_err(|_| CoreError::Fit("fitted control polygon has non-monotone x".to_string()))
}
