//! `exp(t X) v` for sparse `X` by scaled Taylor series.

use super::basis::FockBasis;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

const MAX_TERMS: usize = 200;

pub fn expm_apply(x: &CsrMatrix, t: f64, v: &[f64]) -> Result<Vec<f64>> {
    let norm = x.norm1() * t.abs();
    let steps = (norm / 0.5).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut out = v.to_vec();
    let mut term = vec![0.0; v.len()];
    let mut next = vec![0.0; v.len()];
    for _ in 0..steps {
        term.copy_from_slice(&out);
        let mut converged = false;
        for j in 1..=MAX_TERMS {
            x.matvec(&term, &mut next);
            let c = h / j as f64;
            let mut tn = 0.0;
            let mut on = 0.0;
            for ((tk, nk), ok) in term.iter_mut().zip(&next).zip(out.iter_mut()) {
                *tk = c * nk;
                *ok += *tk;
                tn += *tk * *tk;
                on += *ok * *ok;
            }
            if tn <= (1e-17f64).powi(2) * on {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Exponential(format!("Taylor series exceeded {MAX_TERMS} terms")));
        }
    }
    Ok(out)
}

/// `e^{-X} |N, 0, ..., 0>`, which is `U^dagger` applied to the pure condensate.
pub fn apply_udagger_condensate(x: &CsrMatrix, basis: &FockBasis) -> Result<Vec<f64>> {
    let mut e0 = vec![0.0; basis.len()];
    e0[0] = 1.0;
    let out = expm_apply(x, -1.0, &e0)?;
    let norm: f64 = out.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Exponential(format!("norm drifted to {norm}")));
    }
    Ok(out)
}

/// `<N,0,...| e^{-tX} |N,0,...>`.
pub fn condensate_return_amplitude(x: &CsrMatrix, t: f64, basis: &FockBasis) -> Result<f64> {
    let mut e0 = vec![0.0; basis.len()];
    e0[0] = 1.0;
    Ok(expm_apply(x, -t, &e0)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::basis::DEFAULT_CAP;
    use crate::fock::operators::assemble_x;
    use nalgebra::DMatrix;

    #[test]
    fn rotation_generator() {
        let x = CsrMatrix::from_columns(vec![vec![(1, 1.0)], vec![(0, -1.0)]]);
        let theta = 2.7f64;
        let out = expm_apply(&x, theta, &[1.0, 0.0]).unwrap();
        assert!((out[0] - theta.cos()).abs() < 1e-14);
        assert!((out[1] - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn zero_generator_is_identity() {
        let basis = FockBasis::new(2, 4, DEFAULT_CAP).unwrap();
        let x = assemble_x(&DMatrix::zeros(2, 2), &basis).unwrap();
        let v = apply_udagger_condensate(&x, &basis).unwrap();
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&a| a == 0.0));
    }

    #[test]
    fn norm_is_preserved() {
        let basis = FockBasis::new(3, 10, DEFAULT_CAP).unwrap();
        let alpha = DMatrix::from_row_slice(3, 3, &[0.4, 0.1, 0.0, 0.1, 0.3, -0.2, 0.0, -0.2, 0.2]);
        let x = assemble_x(&alpha, &basis).unwrap();
        let v = apply_udagger_condensate(&x, &basis).unwrap();
        let n: f64 = v.iter().map(|a| a * a).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn return_amplitude_is_stationary_at_zero() {
        let basis = FockBasis::new(2, 6, DEFAULT_CAP).unwrap();
        let alpha = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.2]);
        let x = assemble_x(&alpha, &basis).unwrap();
        let h = 1e-3;
        let plus = condensate_return_amplitude(&x, h, &basis).unwrap();
        let minus = condensate_return_amplitude(&x, -h, &basis).unwrap();
        assert!((plus - minus).abs() / (2.0 * h) < 1e-12);
    }
}
