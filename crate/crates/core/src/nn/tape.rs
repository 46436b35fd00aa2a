//! Reverse-mode differentiation over matrix expressions.
//!
//! A [`Tape`] records every operation in creation order; because each node
//! only refers to earlier nodes, that order is already topological and the
//! backward pass is a single reverse sweep. Values are batch matrices (rows
//! are samples), so one recorded graph serves any batch size.

use alloc::vec::Vec;

use super::matrix::Matrix;

/// Scale of the self-normalizing exponential linear unit.
pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
/// Negative-branch saturation constant of the same activation.
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Node {
    Leaf,
    Matmul(usize, usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    /// `(batch, bias)` with bias a `1 x d` row broadcast over the batch.
    AddBias(usize, usize),
    /// `k * x + c`; only `k` enters the derivative.
    Affine(usize, f64),
    Softsign(usize),
    Selu(usize),
    Tanh(usize),
    /// Row-wise softmax.
    Softmax(usize),
    /// Per-row dot product of two equally shaped matrices, yielding `B x 1`.
    RowwiseDot(usize, usize),
    ConcatCols(Vec<usize>),
    /// Extracts column `j` as a `B x 1` matrix.
    Col(usize, usize),
    /// `(a, s)`: row `i` of `a` scaled by `s[i]`, with `s` a `B x 1` matrix.
    ScaleRows(usize, usize),
    /// Mean over all entries, yielding `1 x 1`.
    MeanAll(usize),
}

/// Expression recorder; owns every intermediate value.
pub struct Tape {
    values: Vec<Matrix>,
    nodes: Vec<Node>,
}

/// Gradients of one output with respect to every tape node.
pub struct Gradients {
    grads: Vec<Matrix>,
}

impl Gradients {
    pub fn wrt(&self, v: Var) -> &Matrix {
        &self.grads[v.0]
    }
}

fn softsign(x: f64) -> f64 {
    x / (1.0 + libm::fabs(x))
}

fn selu(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA * x
    } else {
        SELU_LAMBDA * SELU_ALPHA * (libm::exp(x) - 1.0)
    }
}

fn selu_deriv(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA
    } else {
        SELU_LAMBDA * SELU_ALPHA * libm::exp(x)
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape { values: Vec::new(), nodes: Vec::new() }
    }

    fn push(&mut self, value: Matrix, node: Node) -> Var {
        self.values.push(value);
        self.nodes.push(node);
        Var(self.values.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.values[v.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Enters an input or parameter value.
    pub fn leaf(&mut self, value: Matrix) -> Var {
        self.push(value, Node::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.values[a.0].matmul(&self.values[b.0]);
        self.push(v, Node::Matmul(a.0, b.0))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.values[a.0].zip(&self.values[b.0], |x, y| x + y);
        self.push(v, Node::Add(a.0, b.0))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.values[a.0].zip(&self.values[b.0], |x, y| x - y);
        self.push(v, Node::Sub(a.0, b.0))
    }

    /// Element-wise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.values[a.0].zip(&self.values[b.0], |x, y| x * y);
        self.push(v, Node::Mul(a.0, b.0))
    }

    pub fn add_bias(&mut self, a: Var, bias: Var) -> Var {
        let (av, bv) = (&self.values[a.0], &self.values[bias.0]);
        assert_eq!(bv.rows(), 1, "bias must be a row vector");
        assert_eq!(bv.cols(), av.cols(), "bias width mismatch");
        let v = Matrix::from_fn(av.rows(), av.cols(), |i, j| av.get(i, j) + bv.get(0, j));
        self.push(v, Node::AddBias(a.0, bias.0))
    }

    pub fn affine(&mut self, a: Var, k: f64, c: f64) -> Var {
        let v = self.values[a.0].map(|x| k * x + c);
        self.push(v, Node::Affine(a.0, k))
    }

    pub fn softsign(&mut self, a: Var) -> Var {
        let v = self.values[a.0].map(softsign);
        self.push(v, Node::Softsign(a.0))
    }

    pub fn selu(&mut self, a: Var) -> Var {
        let v = self.values[a.0].map(selu);
        self.push(v, Node::Selu(a.0))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.values[a.0].map(libm::tanh);
        self.push(v, Node::Tanh(a.0))
    }

    /// Row-wise softmax with the usual max shift for stability.
    pub fn softmax(&mut self, a: Var) -> Var {
        let av = &self.values[a.0];
        let mut v = Matrix::zeros(av.rows(), av.cols());
        for i in 0..av.rows() {
            let row = av.row(i);
            let m = row.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            let mut sum = 0.0;
            for (j, &x) in row.iter().enumerate() {
                let e = libm::exp(x - m);
                v.set(i, j, e);
                sum += e;
            }
            for j in 0..av.cols() {
                v.set(i, j, v.get(i, j) / sum);
            }
        }
        self.push(v, Node::Softmax(a.0))
    }

    pub fn rowwise_dot(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (&self.values[a.0], &self.values[b.0]);
        assert!(av.same_shape(bv), "rowwise_dot shape mismatch");
        let mut v = Matrix::zeros(av.rows(), 1);
        for i in 0..av.rows() {
            let mut s = 0.0;
            for (x, y) in av.row(i).iter().zip(bv.row(i)) {
                s += x * y;
            }
            v.set(i, 0, s);
        }
        self.push(v, Node::RowwiseDot(a.0, b.0))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let rows = self.values[parts[0].0].rows();
        let total: usize = parts.iter().map(|p| self.values[p.0].cols()).sum();
        let mut v = Matrix::zeros(rows, total);
        let mut off = 0;
        for p in parts {
            let pv = &self.values[p.0];
            assert_eq!(pv.rows(), rows, "concat_cols row mismatch");
            for i in 0..rows {
                for j in 0..pv.cols() {
                    v.set(i, off + j, pv.get(i, j));
                }
            }
            off += pv.cols();
        }
        self.push(v, Node::ConcatCols(parts.iter().map(|p| p.0).collect()))
    }

    pub fn col(&mut self, a: Var, j: usize) -> Var {
        let av = &self.values[a.0];
        assert!(j < av.cols(), "column index out of range");
        let v = Matrix::from_fn(av.rows(), 1, |i, _| av.get(i, j));
        self.push(v, Node::Col(a.0, j))
    }

    pub fn scale_rows(&mut self, a: Var, s: Var) -> Var {
        let (av, sv) = (&self.values[a.0], &self.values[s.0]);
        assert_eq!(sv.cols(), 1, "row scales must be a column");
        assert_eq!(sv.rows(), av.rows(), "row scale count mismatch");
        let v = Matrix::from_fn(av.rows(), av.cols(), |i, j| av.get(i, j) * sv.get(i, 0));
        self.push(v, Node::ScaleRows(a.0, s.0))
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let av = &self.values[a.0];
        let n = (av.rows() * av.cols()) as f64;
        let v = Matrix::from_vec(1, 1, alloc::vec![av.data().iter().sum::<f64>() / n]);
        self.push(v, Node::MeanAll(a.0))
    }

    /// Reverse sweep from a scalar output, seeded with 1.
    pub fn backward(&self, out: Var) -> Gradients {
        let ov = &self.values[out.0];
        assert_eq!((ov.rows(), ov.cols()), (1, 1), "backward expects a scalar output");
        self.backward_seeded(out, Matrix::from_vec(1, 1, alloc::vec![1.0]))
    }

    /// Reverse sweep with an explicit output gradient of matching shape.
    pub fn backward_seeded(&self, out: Var, seed: Matrix) -> Gradients {
        assert!(seed.same_shape(&self.values[out.0]), "seed shape mismatch");
        let mut g: Vec<Matrix> =
            self.values.iter().map(|v| Matrix::zeros(v.rows(), v.cols())).collect();
        g[out.0] = seed;
        for idx in (0..=out.0).rev() {
            let grad = core::mem::replace(&mut g[idx], Matrix::zeros(0, 0));
            match &self.nodes[idx] {
                Node::Leaf => {}
                Node::Matmul(a, b) => {
                    let da = grad.matmul_nt(&self.values[*b]);
                    let db = self.values[*a].matmul_tn(&grad);
                    g[*a].add_scaled(&da, 1.0);
                    g[*b].add_scaled(&db, 1.0);
                }
                Node::Add(a, b) => {
                    g[*a].add_scaled(&grad, 1.0);
                    g[*b].add_scaled(&grad, 1.0);
                }
                Node::Sub(a, b) => {
                    g[*a].add_scaled(&grad, 1.0);
                    g[*b].add_scaled(&grad, -1.0);
                }
                Node::Mul(a, b) => {
                    let da = grad.zip(&self.values[*b], |gv, bv| gv * bv);
                    let db = grad.zip(&self.values[*a], |gv, av| gv * av);
                    g[*a].add_scaled(&da, 1.0);
                    g[*b].add_scaled(&db, 1.0);
                }
                Node::AddBias(a, bias) => {
                    g[*a].add_scaled(&grad, 1.0);
                    g[*bias].add_scaled(&grad.col_sums(), 1.0);
                }
                Node::Affine(a, k) => {
                    g[*a].add_scaled(&grad, *k);
                }
                Node::Softsign(a) => {
                    let da = grad.zip(&self.values[*a], |gv, x| {
                        let d = 1.0 + libm::fabs(x);
                        gv / (d * d)
                    });
                    g[*a].add_scaled(&da, 1.0);
                }
                Node::Selu(a) => {
                    let da = grad.zip(&self.values[*a], |gv, x| gv * selu_deriv(x));
                    g[*a].add_scaled(&da, 1.0);
                }
                Node::Tanh(a) => {
                    let da = grad.zip(&self.values[idx], |gv, y| gv * (1.0 - y * y));
                    g[*a].add_scaled(&da, 1.0);
                }
                Node::Softmax(a) => {
                    let y = &self.values[idx];
                    let mut da = Matrix::zeros(y.rows(), y.cols());
                    for i in 0..y.rows() {
                        let mut dot = 0.0;
                        for (gv, yv) in grad.row(i).iter().zip(y.row(i)) {
                            dot += gv * yv;
                        }
                        for j in 0..y.cols() {
                            da.set(i, j, y.get(i, j) * (grad.get(i, j) - dot));
                        }
                    }
                    g[*a].add_scaled(&da, 1.0);
                }
                Node::RowwiseDot(a, b) => {
                    let (av, bv) = (&self.values[*a], &self.values[*b]);
                    let da = Matrix::from_fn(av.rows(), av.cols(), |i, j| {
                        grad.get(i, 0) * bv.get(i, j)
                    });
                    let db = Matrix::from_fn(av.rows(), av.cols(), |i, j| {
                        grad.get(i, 0) * av.get(i, j)
                    });
                    g[*a].add_scaled(&da, 1.0);
                    g[*b].add_scaled(&db, 1.0);
                }
                Node::ConcatCols(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let cols = self.values[*p].cols();
                        let slice = Matrix::from_fn(grad.rows(), cols, |i, j| {
                            grad.get(i, off + j)
                        });
                        g[*p].add_scaled(&slice, 1.0);
                        off += cols;
                    }
                }
                Node::Col(a, j) => {
                    let ga = &mut g[*a];
                    for i in 0..grad.rows() {
                        let v = ga.get(i, *j) + grad.get(i, 0);
                        ga.set(i, *j, v);
                    }
                }
                Node::ScaleRows(a, s) => {
                    let (av, sv) = (&self.values[*a], &self.values[*s]);
                    let da = Matrix::from_fn(av.rows(), av.cols(), |i, j| {
                        grad.get(i, j) * sv.get(i, 0)
                    });
                    let mut ds = Matrix::zeros(av.rows(), 1);
                    for i in 0..av.rows() {
                        let mut dot = 0.0;
                        for (gv, avv) in grad.row(i).iter().zip(av.row(i)) {
                            dot += gv * avv;
                        }
                        ds.set(i, 0, dot);
                    }
                    g[*a].add_scaled(&da, 1.0);
                    g[*s].add_scaled(&ds, 1.0);
                }
                Node::MeanAll(a) => {
                    let av = &self.values[*a];
                    let w = grad.get(0, 0) / (av.rows() * av.cols()) as f64;
                    let da = Matrix::from_fn(av.rows(), av.cols(), |_, _| w);
                    g[*a].add_scaled(&da, 1.0);
                }
            }
            g[idx] = grad;
        }
        Gradients { grads: g }
    }
}

impl Default for Tape {
    fn default() -> Self {
        Tape::new()
    }
}
