//! Second-quantized operators restricted to the `N`-particle sector.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::basis::FockBasis;
use super::sparse::CsrMatrix;
use super::tensors::ManyBodyTensors;
use crate::error::{Error, Result};

/// Creation (`true`) or annihilation (`false`) on a mode.
type Ladder = (usize, bool);

/// Applies `ops` (written left to right, applied right to left) to `state`
/// in place. Returns the amplitude, or `None` if the result vanishes.
fn apply_string(state: &mut [u16], ops: &[Ladder]) -> Option<f64> {
    let mut coef = 1.0;
    for &(mode, create) in ops.iter().rev() {
        let n = state[mode];
        if create {
            coef *= (n as f64 + 1.0).sqrt();
            state[mode] = n + 1;
        } else {
            if n == 0 {
                return None;
            }
            coef *= (n as f64).sqrt();
            state[mode] = n - 1;
        }
    }
    Some(coef)
}

/// Collects each column in parallel from a closure that, given the source
/// state, emits `(operator string, weight)` pairs.
fn assemble<F>(basis: &FockBasis, terms: F) -> CsrMatrix
where
    F: Fn(&[u16], &mut dyn FnMut(&[Ladder], f64)) + Sync,
{
    let columns: Vec<Vec<(usize, f64)>> = (0..basis.len())
        .into_par_iter()
        .with_min_len(64)
        .map(|j| {
            let source = basis.state(j);
            let mut scratch = source.to_vec();
            let mut col = Vec::new();
            let mut emit = |ops: &[Ladder], weight: f64| {
                scratch.copy_from_slice(source);
                if let Some(c) = apply_string(&mut scratch, ops) {
                    col.push((basis.rank(&scratch), weight * c));
                }
            };
            terms(source, &mut emit);
            col
        })
        .collect();
    CsrMatrix::from_columns(columns)
}

fn check_modes(basis: &FockBasis, m: usize) -> Result<()> {
    if basis.modes() != m {
        return Err(Error::LengthMismatch {
            expected: basis.modes(),
            got: m,
        });
    }
    Ok(())
}

/// Entries below this fraction of the largest one are quadrature noise.
const NOISE: f64 = 1e-14;

/// `sum h_ij a+_i a_j + 1/(2(N-1)) sum v_ijkl a+_j a+_i a_k a_l`.
pub fn assemble_hn(t: &ManyBodyTensors, basis: &FockBasis) -> Result<CsrMatrix> {
    let m = t.modes();
    check_modes(basis, m)?;
    let hmax = t.h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let vmax = t.vt.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let one: Vec<(usize, usize, f64)> = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, t.h[(i, j)]))
        .filter(|&(_, _, h)| h.abs() > NOISE * hmax)
        .collect();
    let mut two = Vec::new();
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let v = t.v(i, j, k, l);
                    if v.abs() > NOISE * vmax {
                        two.push(([i, j, k, l], v));
                    }
                }
            }
        }
    }
    let coupling = 1.0 / (2.0 * (basis.particles() as f64 - 1.0));
    let h = assemble(basis, |s, emit| {
        for &(i, j, h) in &one {
            if s[j] > 0 {
                emit(&[(i, true), (j, false)], h);
            }
        }
        for &([i, j, k, l], v) in &two {
            if s[l] > 0 && s[k] > (k == l) as u16 {
                emit(&[(j, true), (i, true), (k, false), (l, false)], coupling * v);
            }
        }
    });
    Ok(h.symmetric_part())
}

/// Bogoliubov Hamiltonian with `b_i = a_i a+_0 / sqrt(N-1)`:
/// `sum' D_ij b+_i b_j + 1/2 sum' V_ij (2 b+_i b_j + b_i b_j + b+_j b+_i)`.
/// `d_q` and `v_q` are indexed by the excited modes `1..=M`.
pub fn assemble_hbog(d_q: &DMatrix<f64>, v_q: &DMatrix<f64>, basis: &FockBasis) -> Result<CsrMatrix> {
    let q = d_q.nrows();
    check_modes(basis, q + 1)?;
    let scale = 1.0 / (basis.particles() as f64 - 1.0);
    let h = assemble(basis, |_, emit| {
        for i in 1..=q {
            for j in 1..=q {
                let hop = d_q[(i - 1, j - 1)] + v_q[(i - 1, j - 1)];
                let v = v_q[(i - 1, j - 1)];
                if hop != 0.0 {
                    emit(&[(0, false), (i, true), (j, false), (0, true)], hop * scale);
                }
                if v != 0.0 {
                    emit(&[(i, false), (0, true), (j, false), (0, true)], 0.5 * v * scale);
                    emit(&[(0, false), (j, true), (0, false), (i, true)], 0.5 * v * scale);
                }
            }
        }
    });
    Ok(h.symmetric_part())
}

/// Diagonals of `N^> = N - n_0` and `T_H = sum_{i>=1} D_ii n_i`.
pub fn observables(basis: &FockBasis, d: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_modes(basis, d.len())?;
    let n = basis.particles() as f64;
    let depletion = basis.states().map(|s| n - s[0] as f64).collect();
    let hartree = basis
        .states()
        .map(|s| s.iter().zip(d).skip(1).map(|(&k, &e)| k as f64 * e).sum())
        .collect();
    Ok((depletion, hartree))
}

/// `X = 1/2 sum' alpha_ij (b+_i b+_j - b_i b_j)`, exactly antisymmetric.
pub fn assemble_x(alpha: &DMatrix<f64>, basis: &FockBasis) -> Result<CsrMatrix> {
    let q = alpha.nrows();
    check_modes(basis, q + 1)?;
    let scale = 0.5 / (basis.particles() as f64 - 1.0);
    let raising = assemble(basis, |_, emit| {
        for i in 1..=q {
            for j in 1..=q {
                let a = alpha[(i - 1, j - 1)];
                if a != 0.0 {
                    emit(&[(0, false), (i, true), (0, false), (j, true)], a * scale);
                }
            }
        }
    });
    Ok(raising.antisymmetrized())
}
