//! Discrete curvature of sampled curves.

use super::Point2;
use crate::error::{CoreError, Result};
use alloc::vec::Vec;

/// Unsigned turning angles at the interior vertices of a polyline: the angle
/// between consecutive segment directions, in radians.
pub fn turning_angles(samples: &[Point2]) -> Result<Vec<f64>> {
    if samples.len() < 3 {
        return Err(CoreError::domain("turning angles need at least 3 samples"));
    }
    let mut angles = Vec::with_capacity(samples.len() - 2);
    for i in 1..samples.len() - 1 {
        let a = samples[i] - samples[i - 1];
        let b = samples[i + 1] - samples[i];
        let (na, nb) = (a.norm(), b.norm());
        if na == 0.0 || nb == 0.0 {
            return Err(CoreError::domain("coincident consecutive samples"));
        }
        // atan2 of (cross, dot) is robust near both 0 and pi.
        angles.push(libm::fabs(libm::atan2(a.cross(b), a.dot(b))));
    }
    Ok(angles)
}

/// Discrete curvature per interior vertex, `kappa_i = theta_i / |sp_i sp_{i+1}|`,
/// together with the curvature total `sum kappa_i`.
pub fn discrete_curvature(samples: &[Point2]) -> Result<(Vec<f64>, f64)> {
    let angles = turning_angles(samples)?;
    let mut kappas = Vec::with_capacity(angles.len());
    for (i, theta) in angles.iter().enumerate() {
        let seg = samples[i + 2].dist(samples[i + 1]);
        kappas.push(theta / seg);
    }
    let total = kappas.iter().sum();
    Ok((kappas, total))
}
