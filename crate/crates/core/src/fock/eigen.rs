//! Lowest eigenpairs of symmetric sector operators.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], y: &mut [f64]);
    /// Diagonal used as a preconditioner.
    fn diagonal(&self) -> Vec<f64>;
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        CsrMatrix::dim(self)
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }

    fn diagonal(&self) -> Vec<f64> {
        CsrMatrix::diagonal(self)
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows()).map(|i| self[(i, i)]).collect()
    }
}

/// Sectors up to this size are diagonalized densely outright.
pub const DIRECT_LIMIT: usize = 200;
/// Dense fallback when the iterative solver fails.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Debug)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal, one per value.
    pub vectors: Vec<Vec<f64>>,
    /// `||A v - lambda v||` per pair.
    pub residuals: Vec<f64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Residual target `tol * (|lambda| + 1)`.
pub const ED_TOL: f64 = 1e-9;

/// The `k` lowest eigenpairs of a symmetric operator.
pub fn ed_lowest(op: &dyn LinearOperator, k: usize) -> Result<EigenPairs> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("cannot take {k} eigenpairs of a {n}-dimensional operator")));
    }
    let pairs = if n <= DIRECT_LIMIT {
        dense_lowest(op, k)
    } else {
        match block_davidson(op, k, 0.1 * ED_TOL) {
            Ok(p) => p,
            Err(_) if n <= DENSE_LIMIT => dense_lowest(op, k),
            Err(e) => return Err(e),
        }
    };
    for (i, (&l, &r)) in pairs.values.iter().zip(&pairs.residuals).enumerate() {
        if r > ED_TOL * (l.abs() + 1.0) {
            return Err(Error::Eigensolver(format!("pair {i} residual {r:.3e} above tolerance")));
        }
    }
    Ok(pairs)
}

fn dense_lowest(op: &dyn LinearOperator, k: usize) -> EigenPairs {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply_into(&e, &mut col);
        m.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        e[j] = 0.0;
    }
    let (values, vectors) = sym_eigen(&m);
    let vectors: Vec<Vec<f64>> = (0..k).map(|j| vectors.column(j).iter().copied().collect()).collect();
    let values: Vec<f64> = values.iter().take(k).copied().collect();
    let residuals = residuals(op, &values, &vectors);
    EigenPairs {
        values,
        vectors,
        residuals,
    }
}

fn residuals(op: &dyn LinearOperator, values: &[f64], vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut av = vec![0.0; op.dim()];
    values
        .iter()
        .zip(vectors)
        .map(|(&l, v)| {
            op.apply_into(v, &mut av);
            av.iter().zip(v).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthonormalizes `w` against `basis` (two passes). Returns `false` if `w`
/// is numerically contained in the span.
fn orthonormalize(basis: &[Vec<f64>], w: &mut [f64]) -> bool {
    let before = dot(w, w).sqrt();
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
    let after = dot(w, w).sqrt();
    if !(after > 1e-10 * before) || after == 0.0 {
        return false;
    }
    w.iter_mut().for_each(|x| *x /= after);
    true
}

/// Block Davidson iteration with the diagonal as preconditioner, full
/// reorthogonalization and Rayleigh-Ritz extraction. The block is a little
/// wider than `k` so that degenerate multiplets at the edge of the window
/// are resolved.
fn block_davidson(op: &dyn LinearOperator, k: usize, tol: f64) -> Result<EigenPairs> {
    let n = op.dim();
    let block = (k + 3).min(n);
    let max_basis = (8 * block).max(32).min(n);
    let keep = (2 * block).min(max_basis / 2).max(block);
    let max_iter = 2000;
    let diag = op.diagonal();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);

    // Start from the unit vectors of the smallest diagonal entries, lightly
    // perturbed so that symmetry sectors are not missed.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let mut pending: Vec<Vec<f64>> = order
        .iter()
        .take(block)
        .map(|&i| {
            let mut v: Vec<f64> = (0..n).map(|_| 1e-3 * rng.gen_range(-1.0..1.0)).collect();
            v[i] += 1.0;
            v
        })
        .collect();

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut t = DMatrix::<f64>::zeros(0, 0);

    for _ in 0..max_iter {
        let start = basis.len();
        for mut w in pending.drain(..) {
            if basis.len() >= max_basis {
                break;
            }
            if !orthonormalize(&basis, &mut w) {
                continue;
            }
            let mut aw = vec![0.0; n];
            op.apply_into(&w, &mut aw);
            basis.push(w);
            images.push(aw);
        }
        let s = basis.len();
        if s == start && s < max_basis && s < n {
            // Every correction was already in the span; nudge with noise.
            pending = (0..block).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            continue;
        }
        let mut grown = DMatrix::zeros(s, s);
        grown.view_mut((0, 0), (start, start)).copy_from(&t);
        for i in 0..s {
            for j in start.max(i)..s {
                let v = dot(&basis[i], &images[j]);
                grown[(i, j)] = v;
                grown[(j, i)] = v;
            }
        }
        t = grown;

        let (theta, y) = sym_eigen(&t);
        let wanted = block.min(s);
        let ritz_of = |c: usize, source: &[Vec<f64>]| {
            let mut out = vec![0.0; n];
            for i in 0..s {
                axpy(y[(i, c)], &source[i], &mut out);
            }
            out
        };
        let mut converged = true;
        let mut corrections = Vec::with_capacity(wanted);
        for c in 0..wanted {
            let x = ritz_of(c, &basis);
            let mut r = ritz_of(c, &images);
            axpy(-theta[c], &x, &mut r);
            let rn = dot(&r, &r).sqrt();
            if c < k && rn > tol * (theta[c].abs() + 1.0) {
                converged = false;
            }
            if rn > 0.1 * tol * (theta[c].abs() + 1.0) {
                for (ri, &di) in r.iter_mut().zip(&diag) {
                    let denom = theta[c] - di;
                    *ri /= if denom.abs() < 1e-8 { 1e-8f64.copysign(denom) } else { denom };
                }
                corrections.push(r);
            }
        }
        if converged || s == n {
            let values: Vec<f64> = (0..k).map(|c| theta[c]).collect();
            let vectors: Vec<Vec<f64>> = (0..k).map(|c| ritz_of(c, &basis)).collect();
            let residuals = residuals(op, &values, &vectors);
            return Ok(EigenPairs {
                values,
                vectors,
                residuals,
            });
        }
        if s + corrections.len() > max_basis {
            // Thick restart on the lowest Ritz vectors. Images are recomputed
            // so that rounding does not accumulate across restarts.
            let kept = keep.min(s);
            let old: Vec<Vec<f64>> = (0..kept).map(|c| ritz_of(c, &basis)).collect();
            basis.clear();
            images.clear();
            for mut w in old {
                if orthonormalize(&basis, &mut w) {
                    let mut aw = vec![0.0; n];
                    op.apply_into(&w, &mut aw);
                    basis.push(w);
                    images.push(aw);
                }
            }
            let r = basis.len();
            t = DMatrix::from_fn(r, r, |i, j| dot(&basis[i], &images[j]));
            t = (&t + t.transpose()) * 0.5;
        }
        pending = corrections;
    }
    Err(Error::Eigensolver(format!(
        "block Davidson did not converge in {max_iter} iterations"
    )))
}
