//! One-particle operators in the Hartree eigenbasis: `D = H_H - eps0`, the
//! pair kernel `V(x, y) = phi0(x) v(x - y) phi0(y)`, and the symplectic
//! objects `A`, `B`, `|A*|`, `W0`, `alpha`, `U0` built from `D` and `E`.
//!
//! All matrices are indexed by Hartree modes `phi_0, phi_1, ...`, so `D` is
//! diagonal. Objects that live on `Q = 1 - |phi0><phi0|` are stored with
//! the `phi_0` row and column removed.

use nalgebra::{DMatrix, DVector};

use crate::domain::{convolve, ExternalPotential, GridSpec, Interaction};
use crate::error::{Error, Result};
use crate::hartree::{hartree_matrix, HartreeSolution};
use crate::linalg::{pd_function, sym_eigen};

pub use crate::linalg::sqrt_psd;

/// Hartree modes sampled on the grid.
#[derive(Clone, Debug)]
pub struct GridModes {
    /// Frozen Hartree operator on the grid unknowns.
    pub hartree_op: DMatrix<f64>,
    /// Columns `phi_i` on every grid node, orthonormal under the quadrature.
    pub modes: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct OneBodySet {
    /// Kept Hartree eigenvalues `eps_0 < eps_1 <= ...`.
    pub eps: Vec<f64>,
    pub d: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub gap: f64,
    /// `v(0)` of the pair interaction.
    pub v_origin: f64,
    pub grid_modes: Option<GridModes>,
}

impl OneBodySet {
    /// Builds a set directly from Hartree eigenvalues and a `V` matrix in the
    /// same basis (index 0 is the condensate mode).
    pub fn from_spectral(eps: Vec<f64>, v: DMatrix<f64>, v_origin: f64) -> Result<Self> {
        let m = eps.len();
        if v.nrows() != m || v.ncols() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: v.nrows(),
            });
        }
        if m < 2 {
            return Err(Error::InvalidArgument("need at least two modes".into()));
        }
        let gap = eps[1] - eps[0];
        check_gap(gap, eps[0])?;
        let d = DMatrix::from_diagonal(&DVector::from_iterator(m, eps.iter().map(|e| e - eps[0])));
        Ok(Self {
            eps,
            d,
            v,
            gap,
            v_origin,
            grid_modes: None,
        })
    }

    pub fn size(&self) -> usize {
        self.eps.len()
    }

    /// `D` restricted to `Q`.
    pub fn d_q(&self) -> DMatrix<f64> {
        q_block(&self.d)
    }

    /// `V` restricted to `Q`.
    pub fn v_q(&self) -> DMatrix<f64> {
        q_block(&self.v)
    }

    /// `v_0000 = <phi0|V|phi0>`.
    pub fn v0000(&self) -> f64 {
        self.v[(0, 0)]
    }

    /// Keeps the lowest `m` modes.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m < 2 || m > self.size() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate {} modes to {m}",
                self.size()
            )));
        }
        Ok(Self {
            eps: self.eps[..m].to_vec(),
            d: self.d.view((0, 0), (m, m)).into_owned(),
            v: self.v.view((0, 0), (m, m)).into_owned(),
            gap: self.gap,
            v_origin: self.v_origin,
            grid_modes: self.grid_modes.as_ref().map(|g| GridModes {
                hartree_op: g.hartree_op.clone(),
                modes: g.modes.columns(0, m).into_owned(),
            }),
        })
    }
}

pub(crate) fn q_block(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    m.view((1, 1), (n - 1, n - 1)).into_owned()
}

fn check_gap(gap: f64, eps0: f64) -> Result<()> {
    if !(gap > 1e-10 * eps0.abs().max(1.0)) {
        return Err(Error::DegenerateGroundState(gap));
    }
    Ok(())
}

/// Diagonalizes `H_H` at the converged condensate and expresses `D` and `V`
/// in its lowest `m` eigenmodes.
pub fn assemble_onebody(
    sol: &HartreeSolution,
    grid: &GridSpec,
    external: &ExternalPotential,
    v: &Interaction,
    m: usize,
) -> Result<OneBodySet> {
    grid.check_len(&sol.phi0)?;
    let unknowns = grid.unknowns();
    if m < 2 || m > unknowns.len() {
        return Err(Error::InvalidArgument(format!(
            "mode count {m} must lie in [2, {}]",
            unknowns.len()
        )));
    }
    let vext = external.sample(grid);
    let u = sol.mean_field(grid, v)?;
    let hartree_op = hartree_matrix(grid, &vext, &u);
    let (values, vectors) = sym_eigen(&hartree_op);

    let scale = grid.unknown_weight().sqrt();
    let mut modes = DMatrix::zeros(grid.len(), m);
    for j in 0..m {
        for (a, node) in unknowns.clone().enumerate() {
            modes[(node, j)] = vectors[(a, j)] / scale;
        }
    }
    if grid.integrate(modes.column(0).as_slice()) < 0.0 {
        modes.column_mut(0).neg_mut();
    }

    let eps: Vec<f64> = values.iter().take(m).copied().collect();
    let gap = eps[1] - eps[0];
    check_gap(gap, eps[0])?;
    let d = DMatrix::from_diagonal(&DVector::from_iterator(m, eps.iter().map(|e| e - eps[0])));
    let vmat = pair_kernel_matrix(&sol.phi0, &modes, grid, v)?;

    Ok(OneBodySet {
        eps,
        d,
        v: vmat,
        gap,
        v_origin: v.at_origin(),
        grid_modes: Some(GridModes { hartree_op, modes }),
    })
}

/// `V_ij = int int phi_i(x) phi0(x) v(x - y) phi0(y) phi_j(y)` by quadrature.
fn pair_kernel_matrix(
    phi0: &[f64],
    modes: &DMatrix<f64>,
    grid: &GridSpec,
    v: &Interaction,
) -> Result<DMatrix<f64>> {
    let m = modes.ncols();
    let weights = grid.weights();
    let mut left = DMatrix::zeros(grid.len(), m);
    let mut right = DMatrix::zeros(grid.len(), m);
    for j in 0..m {
        let product: Vec<f64> = (0..grid.len()).map(|x| phi0[x] * modes[(x, j)]).collect();
        let conv = convolve(v, &product, grid)?;
        for x in 0..grid.len() {
            left[(x, j)] = weights[x] * product[x];
            right[(x, j)] = conv[x];
        }
    }
    let vm = left.transpose() * right;
    Ok((&vm + vm.transpose()) * 0.5)
}

/// Symplectic diagonalization objects on `Q`.
#[derive(Clone, Debug)]
pub struct SymplecticSet {
    /// `D^{1/2} E^{-1/2}`.
    pub a: DMatrix<f64>,
    /// `D^{-1/2} E^{1/2}`.
    pub b: DMatrix<f64>,
    /// `|A*| = (A A^T)^{1/2}`.
    pub abs_a_star: DMatrix<f64>,
    /// `|B*| = (B B^T)^{1/2}`.
    pub abs_b_star: DMatrix<f64>,
    /// Orthogonal factor of `A = |A*| W0`.
    pub w0: DMatrix<f64>,
    /// `-log |A*|`.
    pub alpha: DMatrix<f64>,
    /// Orthogonal, `U0^T E U0 = diag(e_1 <= e_2 <= ...)`.
    pub u0: DMatrix<f64>,
    pub e_sorted: Vec<f64>,
}

impl SymplecticSet {
    pub fn alpha_hs_norm(&self) -> f64 {
        self.alpha.norm()
    }
}

/// `d_q` and `e_q` are `D` and `E` restricted to `Q`.
pub fn compute_symplectic(d_q: &DMatrix<f64>, e_q: &DMatrix<f64>, gap: f64) -> Result<SymplecticSet> {
    let q = d_q.nrows();
    let d_diag: Vec<f64> = (0..q).map(|i| d_q[(i, i)]).collect();
    let min_d = d_diag.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(min_d > 1e-12 * gap) {
        return Err(Error::IllConditioned(min_d));
    }
    let d_half = pd_function(d_q, f64::sqrt)?;
    let d_inv_half = pd_function(d_q, |x| 1.0 / x.sqrt())?;
    let e_half = pd_function(e_q, f64::sqrt)?;
    let e_inv_half = pd_function(e_q, |x| 1.0 / x.sqrt())?;
    let a = &d_half * &e_inv_half;
    let b = &d_inv_half * &e_half;
    let abs_a_star = sqrt_psd(&(&a * a.transpose()))?;
    let abs_b_star = sqrt_psd(&(&b * b.transpose()))?;
    let abs_a_inv = pd_function(&(&a * a.transpose()), |x| 1.0 / x.sqrt())?;
    let w0 = &abs_a_inv * &a;
    let alpha = pd_function(&(&a * a.transpose()), |x| -0.5 * x.ln())?;
    let (values, u0) = sym_eigen(e_q);
    Ok(SymplecticSet {
        a,
        b,
        abs_a_star,
        abs_b_star,
        w0,
        alpha,
        u0,
        e_sorted: values.iter().copied().collect(),
    })
}
