//! Compressed-row storage for the operators used inside integrator loops.

use nalgebra::DMatrix;

use crate::operator::{OperatorMatrix, C64, ZERO};

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    /// Exact zeros are dropped; nothing else is thresholded.
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..n {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != ZERO {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn from_operator(op: &OperatorMatrix) -> Self {
        Self::from_dense(op.data())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// `out += alpha * A x`.
    pub fn mul_vec_acc(&self, alpha: C64, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate().take(self.n) {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            let mut acc = ZERO;
            for (v, &c) in self.vals[span.clone()].iter().zip(&self.cols[span]) {
                acc += v * x[c];
            }
            *o += alpha * acc;
        }
    }

    /// `out += alpha * A X` for a column-major `n x n` matrix `X`.
    pub fn mul_mat_acc(&self, alpha: C64, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        for c in 0..n {
            let xc = &x[c * n..(c + 1) * n];
            self.mul_vec_acc(alpha, xc, &mut out[c * n..(c + 1) * n]);
        }
    }

    /// `out += alpha * A X A†` for column-major `X`.
    pub fn sandwich_acc(&self, alpha: C64, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        for m in 0..n {
            for p in self.row_ptr[m]..self.row_ptr[m + 1] {
                let (a, lma) = (self.cols[p], self.vals[p]);
                let lma = alpha * lma;
                for q in 0..n {
                    let mut acc = ZERO;
                    for s in self.row_ptr[q]..self.row_ptr[q + 1] {
                        acc += x[self.cols[s] * n + a] * self.vals[s].conj();
                    }
                    if acc != ZERO {
                        out[q * n + m] += lma * acc;
                    }
                }
            }
        }
    }

    /// Builds an `n x n` matrix from `(row, col, value)` triplets; duplicates
    /// are summed and exact zeros dropped.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n} x {n}");
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().expect("non-empty") += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        let keep: Vec<bool> = vals.iter().map(|v| *v != ZERO).collect();
        let mut k = 0;
        rows.retain(|_| (keep[k], k += 1).0);
        k = 0;
        cols.retain(|_| (keep[k], k += 1).0);
        vals.retain(|v| *v != ZERO);
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, cols, vals }
    }

    /// Superoperator of `X -> sum_k gamma_k L_k X L_k†` acting on column-major
    /// `n x n` matrices flattened to length `n^2`.
    pub fn jump_superoperator(ops: &[(CsrMatrix, f64)]) -> Self {
        let n = ops.first().map_or(0, |(l, _)| l.n);
        let mut triplets = Vec::new();
        for (l, rate) in ops {
            assert_eq!(l.n, n, "jump operators must share a dimension");
            for q in 0..n {
                for (a, lqa) in l.row(q) {
                    for m in 0..n {
                        for (b, lmb) in l.row(m) {
                            triplets.push((m * n + q, b * n + a, lqa * lmb.conj() * *rate));
                        }
                    }
                }
            }
        }
        Self::from_triplets(n * n, triplets)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Frame-rotated copy of a fixed operator. For `P = diag(p)` the current
/// values are `factor * (P A P†)`, i.e. entry `(r, c)` is scaled by
/// `factor * p_r * conj(p_c)`.
#[derive(Clone, Debug)]
pub struct RotatingCsr {
    base: Vec<C64>,
    rows: Vec<usize>,
    current: CsrMatrix,
}

impl RotatingCsr {
    pub fn new(m: CsrMatrix) -> Self {
        let mut rows = Vec::with_capacity(m.nnz());
        for r in 0..m.n {
            rows.extend(std::iter::repeat_n(r, m.row_ptr[r + 1] - m.row_ptr[r]));
        }
        Self { base: m.vals.clone(), rows, current: m }
    }

    pub fn update(&mut self, p: &[C64], factor: C64) {
        let cur = &mut self.current;
        for (k, v) in cur.vals.iter_mut().enumerate() {
            *v = factor * self.base[k] * p[self.rows[k]] * p[cur.cols[k]].conj();
        }
    }

    /// Scales the unrotated values by `factor`.
    pub fn update_static(&mut self, factor: C64) {
        for (v, b) in self.current.vals.iter_mut().zip(&self.base) {
            *v = factor * b;
        }
    }

    pub fn current(&self) -> &CsrMatrix {
        &self.current
    }
}
