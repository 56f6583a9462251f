//! Dense symmetric helpers shared by the one-body and Bogoliubov layers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues below `-CLIP_TOL * norm` are treated as round-off and clipped.
pub const CLIP_TOL: f64 = 1e-10;
/// Eigenvalues below `-INDEFINITE_TOL * norm` reject the input.
pub const INDEFINITE_TOL: f64 = 1e-8;

/// Symmetric eigendecomposition with ascending eigenvalues and canonical
/// eigenvectors (see [`canonicalize_clusters`]).
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(m.nrows(), n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    canonicalize_clusters(&values, &mut vectors, 1e-10 * scale.max(1e-300));
    (values, vectors)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Replaces each cluster of (numerically) equal eigenvalues by a canonical
/// orthonormal basis of the same eigenspace: greedy Gram-Schmidt on the
/// projections of the unit vectors `e_0, e_1, ...`, each step taking the
/// first unit vector whose residual is maximal. For a simple eigenvalue
/// this fixes the sign so that the largest-magnitude entry (first one on
/// ties) is positive.
pub fn canonicalize_clusters(values: &DVector<f64>, vectors: &mut DMatrix<f64>, tol: f64) {
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[start]).abs() <= tol {
            end += 1;
        }
        let block = vectors.columns(start, end - start).into_owned();
        let canonical = canonical_basis(&block);
        vectors.columns_mut(start, end - start).copy_from(&canonical);
        start = end;
    }
}

fn canonical_basis(block: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = block.nrows();
    let k = block.ncols();
    if k == 1 {
        let best = block.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let pick = block
            .iter()
            .position(|v| v.abs() >= best * (1.0 - 1e-8))
            .expect("nonempty column");
        return if block[(pick, 0)] < 0.0 { -block } else { block.clone() };
    }
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(k);
    // Squared residual norms of the candidates P e_r = C (row r of C)^T;
    // accepting q removes q_r^2 from candidate r.
    let mut residual: Vec<f64> = (0..rows).map(|r| block.row(r).norm_squared()).collect();
    while accepted.len() < k {
        let best = residual.iter().fold(0.0f64, |a, &b| a.max(b)).sqrt();
        let pick = residual
            .iter()
            .position(|&r| r.max(0.0).sqrt() >= best * (1.0 - 1e-8))
            .expect("nonempty candidates");
        let mut q = block * block.row(pick).transpose();
        for a in &accepted {
            q.axpy(-a[pick], a, 1.0);
        }
        for a in &accepted {
            let c = a.dot(&q);
            q.axpy(-c, a, 1.0);
        }
        let nrm = q.norm();
        q /= nrm;
        for (r, res) in residual.iter_mut().enumerate() {
            *res -= q[r] * q[r];
        }
        accepted.push(q);
    }
    let mut out = DMatrix::zeros(rows, k);
    for (j, q) in accepted.iter().enumerate() {
        out.set_column(j, q);
    }
    out
}

/// Spectral norm of a symmetric matrix.
pub fn sym_norm(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(symmetrize(m));
    eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Applies `f` to the spectrum of a symmetric positive semidefinite matrix.
pub fn psd_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    if m.is_empty() {
        return Ok(m.clone());
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let norm = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if min < -INDEFINITE_TOL * norm {
        return Err(Error::Indefinite { min, norm });
    }
    let mapped = eig.eigenvalues.map(|x| f(x.max(0.0)));
    let u = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * mapped[j]);
    Ok(symmetrize(&(scaled * u.transpose())))
}

/// Principal square root of a symmetric PSD matrix.
pub fn sqrt_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    psd_function(m, f64::sqrt)
}

/// Applies `f` to the spectrum of a symmetric positive definite matrix.
pub fn pd_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    if m.is_empty() {
        return Ok(m.clone());
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let norm = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if min <= 0.0 {
        return Err(Error::Indefinite { min, norm });
    }
    let u = &eig.eigenvectors;
    let mapped = eig.eigenvalues.map(f);
    let scaled = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * mapped[j]);
    Ok(symmetrize(&(scaled * u.transpose())))
}

/// Largest singular value.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |a, &v| a.max(v))
}

/// Largest absolute off-diagonal entry.
pub fn max_off_diagonal(m: &DMatrix<f64>) -> f64 {
    let mut best = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                best = best.max(m[(i, j)].abs());
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sqrt_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 4.0, 9.0]));
        let r = sqrt_psd(&m).unwrap();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 2.0, 3.0]));
        assert!((r - want).norm() < 1e-14);
    }

    #[test]
    fn sqrt_of_identity() {
        let id = DMatrix::<f64>::identity(4, 4);
        assert!((sqrt_psd(&id).unwrap() - &id).norm() < 1e-15);
    }

    #[test]
    fn sqrt_of_random_psd_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = DMatrix::from_fn(5, 5, |_, _| rng.gen_range(-1.0..1.0));
        let g = &r * r.transpose();
        let s = sqrt_psd(&g).unwrap();
        assert!((&s - s.transpose()).norm() == 0.0);
        assert!(op_norm(&(&s * &s - &g)) <= 1e-10 * sym_norm(&g));
    }

    #[test]
    fn rejects_indefinite() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5]));
        assert!(matches!(sqrt_psd(&m), Err(Error::Indefinite { .. })));
    }

    #[test]
    fn clips_roundoff_negative() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1e-12]));
        let s = sqrt_psd(&m).unwrap();
        assert_eq!(s[(1, 1)], 0.0);
    }

    #[test]
    fn degenerate_cluster_gets_canonical_basis() {
        // A rotated degenerate pair comes back as the coordinate axes.
        let c = 0.6f64;
        let s = 0.8f64;
        let rot = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let m = &rot * DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0, 5.0])) * rot.transpose();
        let (values, vectors) = sym_eigen(&m);
        assert!((values[0] - 2.0).abs() < 1e-14 && (values[2] - 5.0).abs() < 1e-14);
        let id = DMatrix::<f64>::identity(3, 3);
        assert!((vectors - id).norm() < 1e-12);
    }

    #[test]
    fn simple_eigenvector_sign_is_fixed() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (_, vectors) = sym_eigen(&m);
        assert!(vectors[(0, 0)] > 0.0);
        assert!(vectors[(0, 1)] > 0.0);
    }
}
