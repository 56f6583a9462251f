//! Self-consistent solution of the Hartree equation
//! `(-d^2/dx^2 + V_ext) phi + (v * phi^2) phi = eps0 phi`.
//!
//! Each iteration freezes the mean-field potential, takes the positive ground
//! state of the resulting linear operator and mixes it into the current
//! iterate. The mean field is a multiplication operator, so on the box the
//! frozen operator is tridiagonal and its ground state is found by Sturm
//! bisection plus one inverse-iteration solve. The torus uses a dense
//! eigensolve.

use nalgebra::DMatrix;

use crate::domain::{convolve_density, ExternalPotential, GridKind, GridSpec, Interaction};
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScfParams {
    pub mixing: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScfParams {
    fn default() -> Self {
        Self {
            mixing: 0.5,
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

impl ScfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "mixing must lie in (0, 1], got {}",
                self.mixing
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HartreeSolution {
    /// Condensate on every grid node, `sum_i w_i phi0_i^2 = 1`.
    pub phi0: Vec<f64>,
    pub eps0: f64,
    /// Value of the Hartree functional at `phi0`.
    pub hartree_energy: f64,
    /// `<phi0| -d^2/dx^2 + V_ext |phi0>`.
    pub h00: f64,
    /// `int int phi0^2 v phi0^2`.
    pub v0000: f64,
    /// `|| H_H phi0 - eps0 phi0 ||`.
    pub residual: f64,
    pub iterations: usize,
    /// `max(|phi0(x_1)|, |phi0(x_{n-1})|)` on the box, zero on the torus.
    pub boundary_amplitude: f64,
}

/// The frozen Hartree operator `-Δ + V_ext + U` restricted to the unknowns.
pub fn hartree_matrix(grid: &GridSpec, external: &[f64], mean_field: &[f64]) -> DMatrix<f64> {
    let unknowns = grid.unknowns();
    let m = unknowns.len();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut mat = DMatrix::zeros(m, m);
    for (a, node) in unknowns.clone().enumerate() {
        mat[(a, a)] = 2.0 * inv_h2 + external[node] + mean_field[node];
        if a + 1 < m {
            mat[(a, a + 1)] = -inv_h2;
            mat[(a + 1, a)] = -inv_h2;
        }
    }
    if grid.kind() == GridKind::PeriodicTorus {
        mat[(0, m - 1)] -= inv_h2;
        mat[(m - 1, 0)] -= inv_h2;
    }
    mat
}

/// Applies `-Δ + V_ext + U` to a full-node function.
pub fn apply_hartree(grid: &GridSpec, external: &[f64], mean_field: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = grid.apply_neg_laplacian(f);
    for i in grid.unknowns() {
        out[i] += (external[i] + mean_field[i]) * f[i];
    }
    out
}

pub fn mean_field(v: &Interaction, phi: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    let rho: Vec<f64> = phi.iter().map(|p| p * p).collect();
    convolve_density(v, &rho, grid)
}

/// `int (|phi'|^2 + V_ext phi^2) + 1/2 int int phi^2 v phi^2` for normalized `phi`.
pub fn hartree_functional(
    phi: &[f64],
    grid: &GridSpec,
    external: &ExternalPotential,
    v: &Interaction,
) -> Result<f64> {
    grid.check_len(phi)?;
    let norm2 = grid.inner(phi, phi);
    if (norm2 - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(norm2));
    }
    let vext = external.sample(grid);
    let (h00, v0000) = energy_parts(phi, grid, &vext, v)?;
    Ok(h00 + 0.5 * v0000)
}

fn energy_parts(phi: &[f64], grid: &GridSpec, vext: &[f64], v: &Interaction) -> Result<(f64, f64)> {
    let lap = grid.apply_neg_laplacian(phi);
    let kinetic = grid.inner(phi, &lap);
    let potential: f64 = grid
        .unknowns()
        .map(|i| grid.weights()[i] * vext[i] * phi[i] * phi[i])
        .sum();
    let u = mean_field(v, phi, grid)?;
    let rho: Vec<f64> = phi.iter().map(|p| p * p).collect();
    Ok((kinetic + potential, grid.inner(&rho, &u)))
}

fn initial_guess(grid: &GridSpec) -> Vec<f64> {
    let mut phi: Vec<f64> = match grid.kind() {
        GridKind::PeriodicTorus => vec![1.0; grid.len()],
        GridKind::DirichletBox => grid
            .points()
            .iter()
            .map(|&x| (-0.5 * x * x).exp())
            .collect(),
    };
    if grid.kind() == GridKind::DirichletBox {
        let last = phi.len() - 1;
        phi[0] = 0.0;
        phi[last] = 0.0;
    }
    normalize(grid, &mut phi);
    phi
}

fn normalize(grid: &GridSpec, phi: &mut [f64]) {
    let norm = grid.norm(phi);
    let sign = if grid.integrate(phi) < 0.0 { -1.0 } else { 1.0 };
    for p in phi.iter_mut() {
        *p *= sign / norm;
    }
}

/// Positive ground state of the frozen operator as a normalized full-node vector.
fn frozen_ground_state(grid: &GridSpec, external: &[f64], mean_field: &[f64]) -> Vec<f64> {
    let unknowns = grid.unknowns();
    let mut full = vec![0.0; grid.len()];
    match grid.kind() {
        GridKind::DirichletBox => {
            let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
            let diag: Vec<f64> = unknowns
                .clone()
                .map(|i| 2.0 * inv_h2 + external[i] + mean_field[i])
                .collect();
            let vec = tridiagonal_ground_state(&diag, -inv_h2);
            for (a, node) in unknowns.enumerate() {
                full[node] = vec[a];
            }
        }
        GridKind::PeriodicTorus => {
            let mat = hartree_matrix(grid, external, mean_field);
            let (_, vectors) = sym_eigen(&mat);
            for (a, node) in unknowns.enumerate() {
                full[node] = vectors[(a, 0)];
            }
        }
    }
    normalize(grid, &mut full);
    full
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let off2 = off * off;
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - off2 / q };
        if q == 0.0 {
            q = f64::EPSILON * (d.abs() + off.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest eigenvector of a symmetric tridiagonal matrix with constant
/// off-diagonal `off < 0`.
fn tridiagonal_ground_state(diag: &[f64], off: f64) -> Vec<f64> {
    let n = diag.len();
    let radius = 2.0 * off.abs();
    let mut lo = diag.iter().fold(f64::INFINITY, |a, &d| a.min(d)) - radius;
    let mut hi = diag.iter().fold(f64::INFINITY, |a, &d| a.min(d)) + radius;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // lo is a lower bound, so T - lo is positive (semi)definite and the
    // LDL^T solve below needs no pivoting.
    let shift = lo - 1e-12 * (lo.abs() + radius);
    let mut x = vec![1.0; n];
    for _ in 0..3 {
        x = solve_shifted_tridiagonal(diag, off, shift, &x);
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in x.iter_mut() {
            *v /= nrm;
        }
    }
    x
}

fn solve_shifted_tridiagonal(diag: &[f64], off: f64, shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0] - shift;
    c[0] = off / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - shift - off * c[i - 1];
        c[i] = off / pivot;
        d[i] = (rhs[i] - off * d[i - 1]) / pivot;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn residual_and_eps(grid: &GridSpec, external: &[f64], v: &Interaction, phi: &[f64]) -> Result<(f64, f64)> {
    let u = mean_field(v, phi, grid)?;
    let hphi = apply_hartree(grid, external, &u, phi);
    let eps = grid.inner(phi, &hphi);
    let r: Vec<f64> = hphi.iter().zip(phi).map(|(h, p)| h - eps * p).collect();
    Ok((grid.norm(&r), eps))
}

/// Damped self-consistent iteration for the condensate.
pub fn solve_hartree(
    grid: &GridSpec,
    external: &ExternalPotential,
    v: &Interaction,
    params: &ScfParams,
) -> Result<HartreeSolution> {
    params.validate()?;
    let vext = external.sample(grid);
    let mut phi = initial_guess(grid);
    let mut iterations = 0;
    let (mut residual, _) = residual_and_eps(grid, &vext, v, &phi)?;
    while residual >= params.tol {
        if iterations == params.max_iter {
            return Err(Error::NotConverged { iterations, residual });
        }
        let u = mean_field(v, &phi, grid)?;
        let ground = frozen_ground_state(grid, &vext, &u);
        for (p, g) in phi.iter_mut().zip(&ground) {
            *p = (1.0 - params.mixing) * *p + params.mixing * g;
        }
        normalize(grid, &mut phi);
        iterations += 1;
        residual = residual_and_eps(grid, &vext, v, &phi)?.0;
    }
    if let Some(node) = grid.unknowns().find(|&i| phi[i] <= 0.0) {
        return Err(Error::PositivityLost { node });
    }
    let (residual, eps0) = residual_and_eps(grid, &vext, v, &phi)?;
    let (h00, v0000) = energy_parts(&phi, grid, &vext, v)?;
    let boundary_amplitude = match grid.kind() {
        GridKind::DirichletBox => phi[1].abs().max(phi[phi.len() - 2].abs()),
        GridKind::PeriodicTorus => 0.0,
    };
    Ok(HartreeSolution {
        phi0: phi,
        eps0,
        hartree_energy: h00 + 0.5 * v0000,
        h00,
        v0000,
        residual,
        iterations,
        boundary_amplitude,
    })
}

impl HartreeSolution {
    /// Mean-field potential `v * phi0^2` on the grid.
    pub fn mean_field(&self, grid: &GridSpec, v: &Interaction) -> Result<Vec<f64>> {
        mean_field(v, &self.phi0, grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn harmonic_box(n: usize) -> GridSpec {
        GridSpec::dirichlet_box(8.0, n).unwrap()
    }

    #[test]
    fn free_harmonic_oscillator() {
        let grid = harmonic_box(512);
        let sol = solve_hartree(
            &grid,
            &ExternalPotential::Harmonic { omega: 1.0 },
            &Interaction::Zero,
            &ScfParams::default(),
        )
        .unwrap();
        assert!((sol.eps0 - 1.0).abs() < 1e-4, "eps0 = {}", sol.eps0);
        let gauss: Vec<f64> = grid.points().iter().map(|x| (-0.5 * x * x).exp()).collect();
        let norm = grid.norm(&gauss);
        let overlap = grid.inner(&gauss, &sol.phi0) / norm;
        assert!(overlap > 1.0 - 1e-6);
        assert!(sol.boundary_amplitude < 1e-8);
        let e = hartree_functional(
            &sol.phi0,
            &grid,
            &ExternalPotential::Harmonic { omega: 1.0 },
            &Interaction::Zero,
        )
        .unwrap();
        assert!((e - 1.0).abs() < 1e-4);
    }

    #[test]
    fn free_torus_is_constant() {
        for n in [8, 64, 255] {
            let grid = GridSpec::periodic_torus(n).unwrap();
            let sol = solve_hartree(&grid, &ExternalPotential::None, &Interaction::Zero, &ScfParams::default())
                .unwrap();
            assert!(sol.eps0.abs() < 1e-9);
            for p in &sol.phi0 {
                assert!((p - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cosine_torus_fixed_point() {
        // Constant density gives (v * 1) = g, so phi0 = 1 and eps0 = g.
        let grid = GridSpec::periodic_torus(256).unwrap();
        let v = Interaction::cosine_torus(10.0);
        let u = mean_field(&v, &vec![1.0; 256], &grid).unwrap();
        assert!(u.iter().all(|x| (x - 10.0).abs() < 1e-12));
        let sol = solve_hartree(&grid, &ExternalPotential::None, &v, &ScfParams::default()).unwrap();
        assert!((sol.eps0 - 10.0).abs() < 1e-9);
        assert!(sol.phi0.iter().all(|p| (p - 1.0).abs() < 1e-10));
        let e = hartree_functional(&sol.phi0, &grid, &ExternalPotential::None, &v).unwrap();
        assert!((e - 5.0).abs() < 1e-10);
    }

    #[test]
    fn interacting_trap_invariants() {
        let grid = harmonic_box(256);
        let ext = ExternalPotential::Harmonic { omega: 1.0 };
        let v = Interaction::Gaussian { g: 1.0, s: 0.5 };
        let params = ScfParams::default();
        let sol = solve_hartree(&grid, &ext, &v, &params).unwrap();
        assert!(sol.residual < params.tol);
        assert!((grid.inner(&sol.phi0, &sol.phi0) - 1.0).abs() < 1e-12);
        assert!(grid.unknowns().all(|i| sol.phi0[i] > 0.0));
        assert!((sol.eps0 - (sol.h00 + sol.v0000)).abs() < 10.0 * params.tol);
        // eps0 is the lowest eigenvalue of the converged operator
        let vext = ext.sample(&grid);
        let u = sol.mean_field(&grid, &v).unwrap();
        let (values, _) = sym_eigen(&hartree_matrix(&grid, &vext, &u));
        assert!((values[0] - sol.eps0).abs() < 1e-9);
    }

    #[test]
    fn condensate_minimizes_functional() {
        let grid = harmonic_box(128);
        let ext = ExternalPotential::Harmonic { omega: 1.0 };
        let v = Interaction::Gaussian { g: 2.0, s: 0.5 };
        let sol = solve_hartree(&grid, &ext, &v, &ScfParams::default()).unwrap();
        let e0 = hartree_functional(&sol.phi0, &grid, &ext, &v).unwrap();
        assert!((e0 - sol.hartree_energy).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let amp: f64 = rng.gen_range(1e-4..1e-1);
            let mut psi: Vec<f64> = sol
                .phi0
                .iter()
                .map(|p| p + amp * rng.gen_range(-1.0..1.0) * p.abs().sqrt())
                .collect();
            let last = psi.len() - 1;
            psi[0] = 0.0;
            psi[last] = 0.0;
            let norm = grid.norm(&psi);
            psi.iter_mut().for_each(|p| *p /= norm);
            let e = hartree_functional(&psi, &grid, &ext, &v).unwrap();
            assert!(e >= e0 - 1e-12, "{e} < {e0}");
        }
    }

    #[test]
    fn functional_rejects_unnormalized() {
        let grid = GridSpec::periodic_torus(16).unwrap();
        let err = hartree_functional(&[2.0; 16], &grid, &ExternalPotential::None, &Interaction::Zero);
        assert!(matches!(err, Err(Error::NotNormalized(_))));
    }

    #[test]
    fn reports_non_convergence() {
        let grid = harmonic_box(64);
        let params = ScfParams {
            max_iter: 1,
            ..ScfParams::default()
        };
        let err = solve_hartree(
            &grid,
            &ExternalPotential::Harmonic { omega: 1.0 },
            &Interaction::Gaussian { g: 5.0, s: 0.5 },
            &params,
        );
        assert!(matches!(err, Err(Error::NotConverged { iterations: 1, .. })));
    }

    #[test]
    fn tridiagonal_ground_state_matches_dense() {
        let diag: Vec<f64> = (0..40).map(|i| 2.0 + ((i * 13) % 7) as f64 * 0.3).collect();
        let x = tridiagonal_ground_state(&diag, -1.0);
        let mut m = DMatrix::zeros(40, 40);
        for i in 0..40 {
            m[(i, i)] = diag[i];
            if i + 1 < 40 {
                m[(i, i + 1)] = -1.0;
                m[(i + 1, i)] = -1.0;
            }
        }
        let (_, vectors) = sym_eigen(&m);
        let dot: f64 = (0..40).map(|i| x[i] * vectors[(i, 0)]).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-12);
    }
}
