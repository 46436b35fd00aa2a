//! Dense row-major matrices sized for the small networks in this crate.

use alloc::vec;
use alloc::vec::Vec;

/// A dense `rows x cols` matrix of `f64` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds from row-major data; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Entries drawn uniformly from `(-scale, scale)`.
    pub fn uniform(rows: usize, cols: usize, scale: f64, rng: &mut impl rand::Rng) -> Self {
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..scale))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn same_shape(&self, other: &Matrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Element-wise combination; shapes must match.
    pub fn zip(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert!(self.same_shape(other), "shape mismatch in zip");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `self += s * other`, in place.
    pub fn add_scaled(&mut self, other: &Matrix, s: f64) {
        assert!(self.same_shape(other), "shape mismatch in add_scaled");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = out.row_mut(i);
            for (k, &a_ik) in arow.iter().enumerate() {
                let brow = other.row(k);
                for j in 0..brow.len() {
                    orow[j] += a_ik * brow[j];
                }
            }
        }
        out
    }

    /// `self^T * other`, without materializing the transpose.
    pub fn matmul_tn(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "outer dimension mismatch");
        let mut out = Matrix::zeros(self.cols, other.cols);
        for m in 0..self.rows {
            let arow = self.row(m);
            let brow = other.row(m);
            for (i, &a_mi) in arow.iter().enumerate() {
                let orow = out.row_mut(i);
                for j in 0..brow.len() {
                    orow[j] += a_mi * brow[j];
                }
            }
        }
        out
    }

    /// `self * other^T`, without materializing the transpose.
    pub fn matmul_nt(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let arow = self.row(i);
            for j in 0..other.rows {
                let brow = other.row(j);
                let mut s = 0.0;
                for k in 0..arow.len() {
                    s += arow[k] * brow[k];
                }
                out.data[i * other.rows + j] = s;
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Column sums as a `1 x cols` row vector.
    pub fn col_sums(&self) -> Matrix {
        let mut out = Matrix::zeros(1, self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            for (j, &v) in row.iter().enumerate() {
                out.data[j] += v;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(libm::fabs(v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matmul_matches_hand_computed_product() {
        let a = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = Matrix::from_vec(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = a.matmul(&b);
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn fused_transpose_products_agree_with_explicit_transposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Matrix::uniform(4, 5, 1.0, &mut rng);
        let b = Matrix::uniform(4, 3, 1.0, &mut rng);
        let c = Matrix::uniform(6, 5, 1.0, &mut rng);
        let tn = a.matmul_tn(&b);
        let tn_ref = a.transpose().matmul(&b);
        let nt = a.matmul_nt(&c);
        let nt_ref = a.matmul(&c.transpose());
        for (x, y) in tn.data().iter().zip(tn_ref.data()) {
            assert_relative_eq!(x, y, max_relative = 1e-14);
        }
        for (x, y) in nt.data().iter().zip(nt_ref.data()) {
            assert_relative_eq!(x, y, max_relative = 1e-14);
        }
    }

    #[test]
    fn col_sums_and_add_scaled() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.col_sums().data(), &[4.0, 6.0]);
        let mut b = Matrix::zeros(2, 2);
        b.add_scaled(&a, -2.0);
        assert_eq!(b.data(), &[-2.0, -4.0, -6.0, -8.0]);
    }
}
