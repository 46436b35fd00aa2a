//! Small dense linear algebra used by the fitting and test code.
//!
//! Systems here are tiny (tens of unknowns), so simple factorizations without
//! blocking are fine.

use crate::error::{CoreError, Result};
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

/// Solves the symmetric positive definite system `A x = b` by Cholesky
/// factorization. `a` is row-major `n x n` and is consumed as scratch.
///
/// Fails with a fit error when a pivot drops below `1e-13 * max_diag`, which
/// is how rank deficiency in least-squares normal equations surfaces.
pub fn cholesky_solve(mut a: Vec<f64>, n: usize, b: &[f64]) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0_f64, f64::max);
    let floor = 1e-13 * max_diag.max(1e-300);

    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= floor {
            return Err(CoreError::Fit("normal equations not positive definite".to_string()));
        }
        let d = libm::sqrt(d);
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }

    // Forward then backward substitution with L stored in the lower triangle.
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= a[i * n + k] * x[k];
        }
        x[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= a[k * n + i] * x[k];
        }
        x[i] /= a[i * n + i];
    }
    Ok(x)
}

/// Solves `A x = b` by LU with partial pivoting. `a` is row-major `n x n`.
pub fn lu_solve(mut a: Vec<f64>, n: usize, b: &[f64]) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = libm::fabs(a[piv[k] * n + k]);
        for i in (k + 1)..n {
            let v = libm::fabs(a[piv[i] * n + k]);
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(CoreError::LinearSolver("singular dense matrix".to_string()));
        }
        piv.swap(k, p);
        let pk = piv[k];
        for i in (k + 1)..n {
            let pi = piv[i];
            let f = a[pi * n + k] / a[pk * n + k];
            a[pi * n + k] = f;
            for j in (k + 1)..n {
                a[pi * n + j] -= f * a[pk * n + j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut s = b[piv[i]];
        for j in 0..i {
            s -= a[piv[i] * n + j] * x[j];
        }
        x[i] = s;
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= a[piv[i] * n + j] * x[j];
        }
        x[i] = s / a[piv[i] * n + i];
    }
    Ok(x)
}
