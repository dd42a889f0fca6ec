//! Compressed sparse column storage for the term-document matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Sparse `rows × cols` matrix in compressed sparse column layout. Row
/// indices within each column are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    /// Builds a matrix from per-column `(row, value)` lists. Entries are
    /// sorted by row; duplicate rows are summed and explicit zeros dropped.
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let cols = columns.len();
        let mut col_ptr = Vec::with_capacity(cols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in columns {
            col.sort_by_key(|&(r, _)| r);
            let mut last: Option<usize> = None;
            for (r, v) in col {
                if r >= rows {
                    return Err(Error::OutOfRange(alloc::format!(
                        "row index {r} in a matrix with {rows} rows"
                    )));
                }
                if !v.is_finite() {
                    return Err(Error::Numeric(alloc::format!("non-finite entry at row {r}")));
                }
                if last == Some(r) {
                    *values.last_mut().unwrap() += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                    last = Some(r);
                }
            }
            col_ptr.push(row_idx.len());
        }
        let mut m = CscMatrix {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        };
        m.prune_zeros();
        Ok(m)
    }

    pub fn from_dense(dense: &Matrix) -> Self {
        let columns = (0..dense.cols())
            .map(|j| {
                (0..dense.rows())
                    .filter(|&i| dense[(i, j)] != 0.0)
                    .map(|i| (i, dense[(i, j)]))
                    .collect()
            })
            .collect();
        CscMatrix::from_columns(dense.rows(), columns).expect("dense input is well-formed")
    }

    fn prune_zeros(&mut self) {
        let mut new_ptr = Vec::with_capacity(self.cols + 1);
        let mut ri = Vec::with_capacity(self.row_idx.len());
        let mut vs = Vec::with_capacity(self.values.len());
        new_ptr.push(0);
        for j in 0..self.cols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                if self.values[p] != 0.0 {
                    ri.push(self.row_idx[p]);
                    vs.push(self.values[p]);
                }
            }
            new_ptr.push(ri.len());
        }
        self.col_ptr = new_ptr;
        self.row_idx = ri;
        self.values = vs;
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `j`.
    #[inline]
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    pub fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        let (idx, vals) = self.column(j);
        for (&i, &v) in idx.iter().zip(vals) {
            out[i] = v;
        }
        out
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        libm::sqrt(self.column(j).1.iter().map(|v| v * v).sum())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, vals) = self.column(j);
        match idx.binary_search(&i) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Index of the first all-zero column, if any.
    pub fn first_zero_column(&self) -> Option<usize> {
        (0..self.cols).find(|&j| self.col_ptr[j] == self.col_ptr[j + 1])
    }

    /// Column sub-matrix keeping all rows, in the order given by `cols`.
    pub fn select_columns(&self, cols: &[usize]) -> CscMatrix {
        let mut col_ptr = Vec::with_capacity(cols.len() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for &j in cols {
            let (idx, vals) = self.column(j);
            row_idx.extend_from_slice(idx);
            values.extend_from_slice(vals);
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            rows: self.rows,
            cols: cols.len(),
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            let (idx, vals) = self.column(j);
            for (&i, &v) in idx.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `denseᵀ · self` where `dense` is `rows × k`; returned transposed as an
    /// `cols × k` matrix (row `j` holds column `j` of the product).
    pub fn dense_t_mul_transposed(&self, dense: &Matrix) -> Matrix {
        let k = dense.cols();
        let mut out = Matrix::zeros(self.cols, k);
        for j in 0..self.cols {
            let (idx, vals) = self.column(j);
            let out_row = out.row_mut(j);
            for (&i, &v) in idx.iter().zip(vals) {
                for (o, &w) in out_row.iter_mut().zip(dense.row(i)) {
                    *o += v * w;
                }
            }
        }
        out
    }

    /// `self · denseᵀ` where `dense` is `k × cols`; result is `rows × k`.
    pub fn mul_dense_t(&self, dense: &Matrix) -> Matrix {
        let k = dense.rows();
        let mut out = Matrix::zeros(self.rows, k);
        let mut hcol = vec![0.0; k];
        for j in 0..self.cols {
            for (t, h) in hcol.iter_mut().enumerate() {
                *h = dense[(t, j)];
            }
            let (idx, vals) = self.column(j);
            for (&i, &v) in idx.iter().zip(vals) {
                for (o, &h) in out.row_mut(i).iter_mut().zip(&hcol) {
                    *o += v * h;
                }
            }
        }
        out
    }

    /// `self · v` for a dense vector of length `cols`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, &vj) in v.iter().enumerate().take(self.cols) {
            if vj == 0.0 {
                continue;
            }
            let (idx, vals) = self.column(j);
            for (&i, &x) in idx.iter().zip(vals) {
                out[i] += x * vj;
            }
        }
        out
    }

    /// `selfᵀ · v` for a dense vector of length `rows`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| {
                let (idx, vals) = self.column(j);
                idx.iter().zip(vals).map(|(&i, &x)| x * v[i]).sum()
            })
            .collect()
    }

    /// Dot product of columns `a` and `b`.
    pub fn column_dot(&self, a: usize, b: usize) -> f64 {
        let (ia, va) = self.column(a);
        let (ib, vb) = self.column(b);
        let (mut p, mut q) = (0, 0);
        let mut acc = 0.0;
        while p < ia.len() && q < ib.len() {
            match ia[p].cmp(&ib[q]) {
                core::cmp::Ordering::Less => p += 1,
                core::cmp::Ordering::Greater => q += 1,
                core::cmp::Ordering::Equal => {
                    acc += va[p] * vb[q];
                    p += 1;
                    q += 1;
                }
            }
        }
        acc
    }

    /// Dot product of column `j` with a dense vector of length `rows`.
    pub fn column_dot_dense(&self, j: usize, v: &[f64]) -> f64 {
        let (idx, vals) = self.column(j);
        idx.iter().zip(vals).map(|(&i, &x)| x * v[i]).sum()
    }
}
