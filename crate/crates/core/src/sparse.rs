//! Block-sparse linear algebra for the implicit solver: 4x4 block CSR
//! storage, block ILU(0), and left-preconditioned restarted GMRES.
//!
//! Vectors interleave conserved components: entry `4 i + c` is component `c`
//! of cell `i`.

use crate::error::{CoreError, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Dense 4x4 block, row-major.
pub type Block4 = [[f64; 4]; 4];

pub const ZERO_BLOCK: Block4 = [[0.0; 4]; 4];

/// Identity scaled by `s`.
pub fn scaled_identity(s: f64) -> Block4 {
    let mut b = ZERO_BLOCK;
    for k in 0..4 {
        b[k][k] = s;
    }
    b
}

pub(crate) fn block_mul(a: &Block4, b: &Block4) -> Block4 {
    let mut out = ZERO_BLOCK;
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..4 {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
    }
    out
}

fn block_sub_assign(a: &mut Block4, b: &Block4) {
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] -= b[i][j];
        }
    }
}

fn block_vec(a: &Block4, x: &[f64], out: &mut [f64]) {
    for i in 0..4 {
        let mut acc = 0.0;
        for j in 0..4 {
            acc += a[i][j] * x[j];
        }
        out[i] += acc;
    }
}

fn block_transpose(a: &Block4) -> Block4 {
    let mut out = ZERO_BLOCK;
    for i in 0..4 {
        for j in 0..4 {
            out[j][i] = a[i][j];
        }
    }
    out
}

/// Inverts a 4x4 block by Gauss-Jordan with partial pivoting.
fn block_inverse(a: &Block4) -> Result<Block4> {
    let mut m = *a;
    let mut inv = scaled_identity(1.0);
    for col in 0..4 {
        let mut piv = col;
        for r in col + 1..4 {
            if libm::fabs(m[r][col]) > libm::fabs(m[piv][col]) {
                piv = r;
            }
        }
        if libm::fabs(m[piv][col]) < 1e-300 {
            return Err(CoreError::LinearSolver("singular 4x4 block".into()));
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col];
        for j in 0..4 {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for j in 0..4 {
                        m[r][j] -= f * m[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Ok(inv)
}

/// Square block-CSR matrix with 4x4 blocks and sorted column indices within
/// each row.
#[derive(Debug, Clone, PartialEq)]
pub struct BsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    blocks: Vec<Block4>,
}

impl BsrMatrix {
    /// Builds a zero matrix over the given sparsity pattern. Entries may
    /// repeat and arrive in any order; every diagonal position is always
    /// included (the solver and ILU(0) rely on it).
    pub fn from_pattern(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            rows[i].push(i);
        }
        for (i, j) in entries {
            if i >= n || j >= n {
                return Err(CoreError::domain(format!("pattern entry ({}, {}) outside {}", i, j, n)));
            }
            rows[i].push(j);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let blocks = vec![ZERO_BLOCK; col_idx.len()];
        Ok(BsrMatrix { n, row_ptr, col_idx, blocks })
    }

    pub fn n_block_rows(&self) -> usize {
        self.n
    }

    /// Scalar dimension (4 per block row).
    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    fn find(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&Block4> {
        self.find(i, j).map(|k| &self.blocks[k])
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> Option<&mut Block4> {
        self.find(i, j).map(move |k| &mut self.blocks[k])
    }

    /// Adds `b` to block (i, j), which must be in the pattern.
    pub fn add_block(&mut self, i: usize, j: usize, b: &Block4) -> Result<()> {
        match self.block_mut(i, j) {
            Some(dst) => {
                for r in 0..4 {
                    for c in 0..4 {
                        dst[r][c] += b[r][c];
                    }
                }
                Ok(())
            }
            None => Err(CoreError::domain(format!("block ({}, {}) not in pattern", i, j))),
        }
    }

    pub fn zero_blocks(&mut self) {
        for b in self.blocks.iter_mut() {
            *b = ZERO_BLOCK;
        }
    }

    /// Adds `vals[i]` to all four diagonal entries of diagonal block i
    /// (the pseudo-time term `V_i / dt_i`).
    pub fn add_scalar_diagonal(&mut self, vals: &[f64]) -> Result<()> {
        if vals.len() != self.n {
            return Err(CoreError::ShapeMismatch("diagonal length != block rows".into()));
        }
        for (i, &v) in vals.iter().enumerate() {
            let k = self.find(i, i).expect("diagonal always in pattern");
            for c in 0..4 {
                self.blocks[k][c][c] += v;
            }
        }
        Ok(())
    }

    /// Scales block (i, j) by `row_scale[i] * col_scale[j]`; equivalent to
    /// `diag(row_scale) * A * diag(col_scale)` with scalar blocks.
    pub fn scale_blocks(&mut self, row_scale: &[f64], col_scale: &[f64]) {
        debug_assert_eq!(row_scale.len(), self.n);
        debug_assert_eq!(col_scale.len(), self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let s = row_scale[i] * col_scale[self.col_idx[k]];
                for row in self.blocks[k].iter_mut() {
                    for v in row.iter_mut() {
                        *v *= s;
                    }
                }
            }
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        for v in y.iter_mut() {
            *v = 0.0;
        }
        for i in 0..self.n {
            let (yi, _) = y[4 * i..].split_at_mut(4);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                block_vec(&self.blocks[k], &x[4 * j..4 * j + 4], yi);
            }
        }
    }

    /// Explicit transpose: transposed pattern with transposed blocks.
    pub fn transpose(&self) -> BsrMatrix {
        let mut counts = vec![0usize; self.n];
        for &j in &self.col_idx {
            counts[j] += 1;
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        row_ptr.push(0usize);
        for i in 0..self.n {
            let last = row_ptr[i];
            row_ptr.push(last + counts[i]);
        }
        let nnz = self.col_idx.len();
        let mut col_idx = vec![0usize; nnz];
        let mut blocks = vec![ZERO_BLOCK; nnz];
        let mut cursor = row_ptr.clone();
        // Row-major scan writes each transposed row in ascending column
        // order, so the result keeps sorted columns.
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let dst = cursor[j];
                cursor[j] += 1;
                col_idx[dst] = i;
                blocks[dst] = block_transpose(&self.blocks[k]);
            }
        }
        BsrMatrix { n: self.n, row_ptr, col_idx, blocks }
    }
}

/// Block ILU(0) factors sharing the matrix pattern: unit-lower L and upper U
/// with inverted diagonal blocks stored for the solve.
#[derive(Debug, Clone)]
pub struct BlockIlu0 {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    factors: Vec<Block4>,
    diag_inv: Vec<Block4>,
    diag_pos: Vec<usize>,
}

impl BlockIlu0 {
    /// Factors `a` in ILU(0) form (no fill outside the pattern).
    pub fn factor(a: &BsrMatrix) -> Result<Self> {
        let n = a.n;
        let row_ptr = a.row_ptr.clone();
        let col_idx = a.col_idx.clone();
        let mut factors = a.blocks.clone();
        let mut diag_pos = vec![0usize; n];
        for i in 0..n {
            diag_pos[i] = a.find(i, i).expect("diagonal always in pattern");
        }
        let mut diag_inv = vec![ZERO_BLOCK; n];

        let find_in_row = |i: usize, j: usize, col_idx: &[usize]| -> Option<usize> {
            let lo = row_ptr[i];
            let hi = row_ptr[i + 1];
            col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
        };

        for i in 0..n {
            // Eliminate columns k < i within the pattern of row i.
            for kk in row_ptr[i]..row_ptr[i + 1] {
                let k = col_idx[kk];
                if k >= i {
                    break;
                }
                // L_ik = A_ik * inv(U_kk); inv(U_kk) exists because k < i.
                let lik = block_mul(&factors[kk], &diag_inv[k]);
                factors[kk] = lik;
                for jj in row_ptr[k]..row_ptr[k + 1] {
                    let j = col_idx[jj];
                    if j <= k {
                        continue;
                    }
                    if let Some(pos) = find_in_row(i, j, &col_idx) {
                        let prod = block_mul(&lik, &factors[jj]);
                        block_sub_assign(&mut factors[pos], &prod);
                    }
                }
            }
            diag_inv[i] = block_inverse(&factors[diag_pos[i]]).map_err(|_| {
                CoreError::LinearSolver(format!("ILU(0) hit a singular diagonal block at row {}", i))
            })?;
        }
        Ok(BlockIlu0 { n, row_ptr, col_idx, factors, diag_inv, diag_pos })
    }

    /// x = (L U)^{-1} b.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        debug_assert_eq!(b.len(), 4 * self.n);
        debug_assert_eq!(x.len(), 4 * self.n);
        x.copy_from_slice(b);
        // Forward: unit-diagonal L.
        for i in 0..self.n {
            let mut xi = [x[4 * i], x[4 * i + 1], x[4 * i + 2], x[4 * i + 3]];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if j >= i {
                    break;
                }
                let mut contrib = [0.0; 4];
                block_vec(&self.factors[k], &x[4 * j..4 * j + 4], &mut contrib);
                for c in 0..4 {
                    xi[c] -= contrib[c];
                }
            }
            x[4 * i..4 * i + 4].copy_from_slice(&xi);
        }
        // Backward: U with stored diagonal inverses.
        for i in (0..self.n).rev() {
            let mut xi = [x[4 * i], x[4 * i + 1], x[4 * i + 2], x[4 * i + 3]];
            for k in self.diag_pos[i] + 1..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let mut contrib = [0.0; 4];
                block_vec(&self.factors[k], &x[4 * j..4 * j + 4], &mut contrib);
                for c in 0..4 {
                    xi[c] -= contrib[c];
                }
            }
            let mut out = [0.0; 4];
            block_vec(&self.diag_inv[i], &xi, &mut out);
            x[4 * i..4 * i + 4].copy_from_slice(&out);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Restart length, restart budget, and relative tolerance for GMRES.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresParams {
    pub restart: usize,
    pub max_restarts: usize,
    pub tol: f64,
}

impl Default for GmresParams {
    fn default() -> Self {
        GmresParams { restart: 50, max_restarts: 40, tol: 1e-4 }
    }
}

/// Outcome of a GMRES run. `residual` is the preconditioned relative
/// residual at exit; callers decide how hard to fail on `!converged`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresInfo {
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    pub residual: f64,
}

/// Left-preconditioned restarted GMRES on `A x = b`, starting from `x0`.
///
/// Convergence is measured as `||M^{-1}(b - A x)|| / ||M^{-1} b||`. A zero
/// right-hand side returns x = 0 immediately. Non-finite arithmetic is an
/// error; running out of restarts is reported via `converged = false`.
pub fn gmres(
    a: &BsrMatrix,
    precond: Option<&BlockIlu0>,
    b: &[f64],
    x0: &[f64],
    params: &GmresParams,
) -> Result<(Vec<f64>, GmresInfo)> {
    let dim = a.dim();
    if b.len() != dim || x0.len() != dim {
        return Err(CoreError::ShapeMismatch("GMRES vector length != matrix dimension".into()));
    }
    if params.restart == 0 {
        return Err(CoreError::domain("GMRES restart length must be >= 1"));
    }
    let apply_m = |v: &[f64], out: &mut Vec<f64>| {
        match precond {
            Some(p) => p.solve(v, out),
            None => out.copy_from_slice(v),
        }
    };

    let mut mb = vec![0.0; dim];
    apply_m(b, &mut mb);
    let norm_mb = norm2(&mb);
    if norm_mb == 0.0 {
        return Ok((
            vec![0.0; dim],
            GmresInfo { converged: true, iterations: 0, restarts: 0, residual: 0.0 },
        ));
    }

    let m = params.restart;
    let mut x = x0.to_vec();
    let mut total_iters = 0usize;
    let mut scratch = vec![0.0; dim];
    let mut residual = f64::INFINITY;

    for restart in 0..=params.max_restarts {
        a.matvec(&x, &mut scratch);
        let raw: Vec<f64> = b.iter().zip(&scratch).map(|(bi, ai)| bi - ai).collect();
        let mut r = vec![0.0; dim];
        apply_m(&raw, &mut r);
        let beta = norm2(&r);
        residual = beta / norm_mb;
        if !residual.is_finite() {
            return Err(CoreError::LinearSolver("GMRES residual is not finite".into()));
        }
        if residual <= params.tol {
            return Ok((
                x,
                GmresInfo { converged: true, iterations: total_iters, restarts: restart, residual },
            ));
        }
        if restart == params.max_restarts {
            break;
        }

        // Arnoldi with modified Gram-Schmidt; Givens rotations keep the
        // least-squares residual cheap to track.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![0.0f64; m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![0.0f64; m];
        let mut g = vec![0.0f64; m + 1];
        g[0] = beta;
        let mut k_used = 0usize;

        for j in 0..m {
            a.matvec(&basis[j], &mut scratch);
            let mut w = vec![0.0; dim];
            apply_m(&scratch, &mut w);
            for i in 0..=j {
                let hij = dot(&w, &basis[i]);
                h[i][j] = hij;
                for (wv, bv) in w.iter_mut().zip(&basis[i]) {
                    *wv -= hij * bv;
                }
            }
            let hnext = norm2(&w);
            if !hnext.is_finite() {
                return Err(CoreError::LinearSolver("GMRES breakdown: non-finite Arnoldi norm".into()));
            }
            h[j + 1][j] = hnext;
            // Apply accumulated rotations to the new column.
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = libm::sqrt(h[j][j] * h[j][j] + hnext * hnext);
            if denom == 0.0 {
                // Exact breakdown: the Krylov space is invariant and the
                // current least-squares solution is exact.
                k_used = j;
                break;
            }
            cs[j] = h[j][j] / denom;
            sn[j] = hnext / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            total_iters += 1;
            k_used = j + 1;
            residual = libm::fabs(g[j + 1]) / norm_mb;
            if residual <= params.tol || hnext == 0.0 {
                break;
            }
            if j + 1 < m {
                basis.push(w.iter().map(|v| v / hnext).collect());
            }
        }

        // Back-substitute y from the triangularized H and update x.
        let mut y = vec![0.0f64; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[i][j] * y[j];
            }
            if h[i][i] == 0.0 {
                return Err(CoreError::LinearSolver("GMRES breakdown: singular Hessenberg".into()));
            }
            y[i] = acc / h[i][i];
        }
        for (i, &yi) in y.iter().enumerate() {
            for (xv, bv) in x.iter_mut().zip(&basis[i]) {
                *xv += yi * bv;
            }
        }
    }

    Ok((x, GmresInfo { converged: false, iterations: total_iters, restarts: params.max_restarts, residual }))
}

/// Iteration cap and relative tolerance for BiCGStab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicgstabParams {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for BicgstabParams {
    fn default() -> Self {
        BicgstabParams { tol: 1e-8, max_iters: 4000 }
    }
}

/// Convergence report of a BiCGStab solve; `residual` is the true
/// relative residual `||b - Ax|| / ||b||`, not a preconditioned norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicgstabInfo {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Preconditioned BiCGStab with breakdown restarts.
///
/// Exists alongside [`gmres`] because the two linear systems in this crate
/// behave differently: the pseudo-time shifted Newton systems are solved
/// by restarted GMRES in a few dozen iterations, while the unshifted
/// transposed systems of the dual solves make restarted GMRES stagnate
/// far above tight tolerances.
///
/// The recurrence is fragile on those systems: a near-orthogonal shadow
/// residual degrades the scalars and the residual can blow up by orders of
/// magnitude. The solve therefore tracks the best iterate seen, and on
/// relative breakdown or divergence it restarts the recurrence from that
/// iterate with a fresh shadow vector. What is finally returned is always
/// the best iterate, with its true relative residual `||b - Ax|| / ||b||`.
pub fn bicgstab(
    a: &BsrMatrix,
    precond: Option<&BlockIlu0>,
    b: &[f64],
    x0: &[f64],
    params: &BicgstabParams,
) -> Result<(Vec<f64>, BicgstabInfo)> {
    let n = a.dim();
    if b.len() != n || x0.len() != n {
        return Err(CoreError::ShapeMismatch("BiCGStab vector length != matrix dim".into()));
    }
    let apply_m = |src: &[f64], dst: &mut Vec<f64>| match precond {
        Some(m) => m.solve(src, dst),
        None => dst.copy_from_slice(src),
    };

    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            BicgstabInfo { converged: true, iterations: 0, residual: 0.0 },
        ));
    }

    // Inner products smaller than this times the Cauchy-Schwarz bound count
    // as breakdown; residual growth past this factor over the best iterate
    // counts as divergence.
    const BREAKDOWN: f64 = 1e-14;
    const DIVERGENCE: f64 = 100.0;
    const MAX_RESTARTS: usize = 60;

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    for (rv, bv) in r.iter_mut().zip(b) {
        *rv = bv - *rv;
    }
    let mut residual = norm2(&r) / bnorm;
    if residual <= params.tol {
        return Ok((x, BicgstabInfo { converged: true, iterations: 0, residual }));
    }

    let mut best_x = x.clone();
    let mut best_residual = residual;

    let mut rhat = r.clone();
    let mut rhat_norm = norm2(&rhat);
    let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut fresh = true;
    let mut restarts = 0;

    let mut it = 0;
    while it < params.max_iters {
        it += 1;

        // Restart helper state: rebuilding the recurrence from the best
        // iterate costs one matvec and clears the degenerate directions.
        let mut want_restart = false;

        let rho_new = dot(&rhat, &r);
        if rho_new.abs() < BREAKDOWN * rhat_norm * (residual * bnorm) {
            want_restart = true;
        }

        if !want_restart {
            let beta = (rho_new / rho) * (alpha / omega);
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
            }
            apply_m(&p, &mut phat);
            a.matvec(&phat, &mut v);
            let denom = dot(&rhat, &v);
            if denom.abs() < BREAKDOWN * rhat_norm * norm2(&v) {
                want_restart = true;
            } else {
                alpha = rho_new / denom;
                // s = r - alpha v, reusing r's storage.
                for k in 0..n {
                    r[k] -= alpha * v[k];
                }
                residual = norm2(&r) / bnorm;
                if !residual.is_finite() || residual > DIVERGENCE * best_residual {
                    want_restart = true;
                } else {
                    if residual < best_residual {
                        best_residual = residual;
                        best_x.clone_from(&x);
                        for k in 0..n {
                            best_x[k] += alpha * phat[k];
                        }
                        if residual <= params.tol {
                            return Ok((
                                best_x,
                                BicgstabInfo { converged: true, iterations: it, residual },
                            ));
                        }
                    }
                    apply_m(&r, &mut shat);
                    a.matvec(&shat, &mut t);
                    let tt = dot(&t, &t);
                    if tt < 1e-300 {
                        want_restart = true;
                    } else {
                        omega = dot(&t, &r) / tt;
                        for k in 0..n {
                            x[k] += alpha * phat[k] + omega * shat[k];
                            r[k] -= omega * t[k];
                        }
                        residual = norm2(&r) / bnorm;
                        if !residual.is_finite() || residual > DIVERGENCE * best_residual {
                            want_restart = true;
                        } else {
                            if residual < best_residual {
                                best_residual = residual;
                                best_x.clone_from(&x);
                                if residual <= params.tol {
                                    return Ok((
                                        best_x,
                                        BicgstabInfo {
                                            converged: true,
                                            iterations: it,
                                            residual,
                                        },
                                    ));
                                }
                            }
                            rho = rho_new;
                            fresh = false;
                        }
                    }
                }
            }
        }

        if want_restart {
            // A fresh recurrence that immediately breaks down cannot make
            // progress; return the best iterate instead of cycling.
            if fresh || restarts >= MAX_RESTARTS {
                break;
            }
            restarts += 1;
            x.clone_from(&best_x);
            a.matvec(&x, &mut r);
            for (rv, bv) in r.iter_mut().zip(b) {
                *rv = bv - *rv;
            }
            residual = norm2(&r) / bnorm;
            rhat.clone_from(&r);
            rhat_norm = norm2(&rhat);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            p.iter_mut().for_each(|e| *e = 0.0);
            v.iter_mut().for_each(|e| *e = 0.0);
            fresh = true;
        }
    }
    Ok((
        best_x,
        BicgstabInfo {
            converged: best_residual <= params.tol,
            iterations: it,
            residual: best_residual,
        },
    ))
}
