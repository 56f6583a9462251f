//! Compressed sparse row matrices for sector operators.

use nalgebra::DMatrix;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds the square matrix whose column `j` holds the `(row, value)`
    /// pairs in `columns[j]`. Repeated rows are summed; exact zeros dropped.
    pub fn from_columns(columns: Vec<Vec<(usize, f64)>>) -> Self {
        let n = columns.len();
        let mut counts = vec![0usize; n + 1];
        for col in &columns {
            for &(r, _) in col {
                counts[r + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let nnz = counts[n];
        let mut indices = vec![0usize; nnz];
        let mut data = vec![0.0; nnz];
        let mut next = counts.clone();
        for (j, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                indices[next[r]] = j;
                data[next[r]] = v;
                next[r] += 1;
            }
        }
        // Columns were visited in order, so each row is sorted by column;
        // merge duplicates in place.
        let mut out_ptr = Vec::with_capacity(n + 1);
        let mut out_idx = Vec::with_capacity(nnz);
        let mut out_val = Vec::with_capacity(nnz);
        out_ptr.push(0);
        for r in 0..n {
            let mut k = counts[r];
            while k < counts[r + 1] {
                let c = indices[k];
                let mut v = data[k];
                k += 1;
                while k < counts[r + 1] && indices[k] == c {
                    v += data[k];
                    k += 1;
                }
                if v != 0.0 {
                    out_idx.push(c);
                    out_val.push(v);
                }
            }
            out_ptr.push(out_idx.len());
        }
        Self {
            n,
            indptr: out_ptr,
            indices: out_idx,
            data: out_val,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_columns(diag.iter().enumerate().map(|(i, &d)| vec![(i, d)]).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.data[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                cols[r].push((c, v));
            }
        }
        Self::from_columns(cols)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        // Row r of the result, collected as column r of its transpose.
        for r in 0..self.n {
            cols[r].extend(self.row(r).map(|(c, v)| (c, a * v)));
            cols[r].extend(other.row(r).map(|(c, v)| (c, b * v)));
        }
        let mut t = Self::from_columns(cols);
        t = t.transpose();
        t
    }

    /// `(A + A^T) / 2`.
    pub fn symmetric_part(&self) -> Self {
        self.combine(0.5, &self.transpose(), 0.5)
    }

    /// `A - A^T`.
    pub fn antisymmetrized(&self) -> Self {
        self.combine(1.0, &self.transpose(), -1.0)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(r, out)| {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            *out = acc;
        });
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut sums = vec![0.0; self.n];
        for (k, &c) in self.indices.iter().enumerate() {
            sums[c] += self.data[k].abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// `max |A - A^T|` entrywise.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        self.combine(1.0, &t, -1.0).max_abs()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// `<x|A|y>`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.apply(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }
}
