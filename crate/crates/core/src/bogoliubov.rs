//! Bogoliubov excitation energies, the BdG cross-check, the trace
//! correction to the ground-state energy, and enumeration of predicted
//! many-body excitation levels.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hartree::HartreeSolution;
use crate::linalg::{sqrt_psd, sym_eigen, symmetrize};
use crate::onebody::{q_block, OneBodySet};

/// Cap on the number of excitation sums produced by [`enumerate_excitations`].
pub const ENUMERATION_CAP: usize = 1_000_000;

/// `E_0(N) ~ a N + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundEnergyCoefficients {
    /// `h00 + v0000 / 2`, the Hartree energy per particle.
    pub a: f64,
    /// `v0000 / 2 - tr(D + V - E) / 2`.
    pub b: f64,
}

#[derive(Clone, Debug)]
pub struct BogoliubovResult {
    /// `E` on the full truncated space (mode 0 included).
    pub e_matrix: DMatrix<f64>,
    /// Eigenvalues of `E` on `Q`, ascending.
    pub e: Vec<f64>,
    pub trace_correction: f64,
    pub coefficients: GroundEnergyCoefficients,
}

/// `E = (D^{1/2} (D + 2V) D^{1/2})^{1/2}` and its spectrum on `Q`.
pub fn compute_e(ob: &OneBodySet) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let m = ob.size();
    let d_half = DMatrix::from_fn(m, m, |i, j| if i == j { ob.d[(i, i)].max(0.0).sqrt() } else { 0.0 });
    let inner = symmetrize(&(&d_half * (&ob.d + &ob.v * 2.0) * &d_half));
    let e_matrix = sqrt_psd(&inner)?;
    let (values, _) = sym_eigen(&q_block(&e_matrix));
    Ok((e_matrix, values.iter().copied().collect()))
}

/// Positive eigenvalues of `[[D+V, V], [-V, -(D+V)]]` on `Q`, ascending.
pub fn bdg_spectrum(ob: &OneBodySet) -> Result<Vec<f64>> {
    let d = ob.d_q();
    let v = ob.v_q();
    let q = d.nrows();
    let dv = &d + &v;
    let mut block = DMatrix::zeros(2 * q, 2 * q);
    block.view_mut((0, 0), (q, q)).copy_from(&dv);
    block.view_mut((0, q), (q, q)).copy_from(&v);
    block.view_mut((q, 0), (q, q)).copy_from(&(-&v));
    block.view_mut((q, q), (q, q)).copy_from(&(-&dv));
    let scale = dv.norm().max(f64::MIN_POSITIVE);
    let eigenvalues = block.complex_eigenvalues();
    let mut positive = Vec::with_capacity(q);
    for z in eigenvalues.iter() {
        if z.im.abs() > 1e-8 * scale {
            return Err(Error::ComplexSpectrum { re: z.re, im: z.im });
        }
        if z.re > 0.0 {
            positive.push(z.re);
        }
    }
    if positive.len() != q {
        return Err(Error::Eigensolver(format!(
            "expected {q} positive BdG frequencies, found {}",
            positive.len()
        )));
    }
    positive.sort_by(f64::total_cmp);
    Ok(positive)
}

/// `tr(D + V - E)` over the full truncated space; the condensate diagonal
/// contributes `v0000` because `D phi0 = E phi0 = 0`.
pub fn trace_correction(ob: &OneBodySet, e_matrix: &DMatrix<f64>) -> f64 {
    (0..ob.size())
        .map(|i| ob.d[(i, i)] + ob.v[(i, i)] - e_matrix[(i, i)])
        .sum()
}

pub fn analyze(ob: &OneBodySet, sol: &HartreeSolution) -> Result<BogoliubovResult> {
    analyze_with(ob, sol.h00, sol.v0000)
}

/// Same as [`analyze`] with the condensate energies passed explicitly.
pub fn analyze_with(ob: &OneBodySet, h00: f64, v0000: f64) -> Result<BogoliubovResult> {
    let (e_matrix, e) = compute_e(ob)?;
    let trace = trace_correction(ob, &e_matrix);
    Ok(BogoliubovResult {
        e_matrix,
        e,
        trace_correction: trace,
        coefficients: GroundEnergyCoefficients {
            a: h00 + 0.5 * v0000,
            b: 0.5 * v0000 - 0.5 * trace,
        },
    })
}

/// Leading-order ground-state energy
/// `N h00 + (N+1)/2 v0000 - tr(D+V-E)/2`; the `O(N^{-1/2})` remainder is omitted.
pub fn predict_ground_energy(bog: &BogoliubovResult, particles: usize) -> Result<f64> {
    if particles < 2 {
        return Err(Error::InvalidArgument(format!("need N >= 2, got {particles}")));
    }
    let n = particles as f64;
    Ok(bog.coefficients.a * n + bog.coefficients.b)
}

/// All distinct values `sum_i n_i e_i <= xi` with `sum_i n_i <= N`, ascending,
/// including 0. Values within `1e-12 xi` of each other are merged.
pub fn enumerate_excitations(e: &[f64], xi: f64, particles: usize) -> Result<Vec<f64>> {
    if e.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidArgument("excitation energies must be positive".into()));
    }
    if e.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("excitation energies must be ascending".into()));
    }
    if !(xi >= 0.0) {
        return Err(Error::InvalidArgument(format!("xi must be nonnegative, got {xi}")));
    }
    let slack = 1e-12 * xi;
    let mut sums = Vec::new();
    collect_sums(e, 0, 0.0, particles, xi + slack, &mut sums)?;
    sums.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(sums.len());
    for s in sums {
        match out.last() {
            Some(&last) if s - last <= slack => {}
            _ => out.push(s),
        }
    }
    Ok(out)
}

/// Like [`enumerate_excitations`] but keeps every occupation pattern, so
/// degenerate levels appear with their multiplicity.
pub fn excitation_levels(e: &[f64], xi: f64, particles: usize) -> Result<Vec<f64>> {
    if e.iter().any(|&x| !(x > 0.0)) || e.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("excitation energies must be positive and ascending".into()));
    }
    let mut sums = Vec::new();
    collect_sums(e, 0, 0.0, particles, xi * (1.0 + 1e-12), &mut sums)?;
    sums.sort_by(f64::total_cmp);
    Ok(sums)
}

fn collect_sums(
    e: &[f64],
    start: usize,
    partial: f64,
    remaining: usize,
    limit: f64,
    out: &mut Vec<f64>,
) -> Result<()> {
    out.push(partial);
    if out.len() > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge(ENUMERATION_CAP));
    }
    if remaining == 0 {
        return Ok(());
    }
    for (i, &ei) in e.iter().enumerate().skip(start) {
        let next = partial + ei;
        if next > limit {
            break;
        }
        collect_sums(e, i, next, remaining - 1, limit, out)?;
    }
    Ok(())
}
