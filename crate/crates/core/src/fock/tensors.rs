//! One- and two-body matrix elements in the Hartree mode basis.

use nalgebra::DMatrix;

use crate::domain::{convolve, ExternalPotential, GridSpec, Interaction};
use crate::error::{Error, Result};
use crate::onebody::OneBodySet;

#[derive(Clone, Debug)]
pub struct ManyBodyTensors {
    /// `h_ij = <phi_i| -Laplacian + V_ext |phi_j>`.
    pub h: DMatrix<f64>,
    /// `v_ijkl = int int phi_i(x) phi_j(y) v(x - y) phi_k(x) phi_l(y)`,
    /// flattened row-major.
    pub vt: Vec<f64>,
    /// `v(0)`.
    pub v_origin: f64,
}

impl ManyBodyTensors {
    pub fn from_parts(h: DMatrix<f64>, vt: Vec<f64>, v_origin: f64) -> Result<Self> {
        let m = h.nrows();
        if h.ncols() != m {
            return Err(Error::InvalidArgument("h must be square".into()));
        }
        if vt.len() != m.pow(4) {
            return Err(Error::LengthMismatch {
                expected: m.pow(4),
                got: vt.len(),
            });
        }
        Ok(Self { h, vt, v_origin })
    }

    pub fn modes(&self) -> usize {
        self.h.nrows()
    }

    #[inline]
    pub fn v(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let m = self.modes();
        self.vt[((i * m + j) * m + k) * m + l]
    }

    pub fn h00(&self) -> f64 {
        self.h[(0, 0)]
    }

    pub fn v0000(&self) -> f64 {
        self.vt[0]
    }

    /// Largest `|h_i0 + v_i000|` over `i >= 1`, with its mode.
    pub fn stationarity_defect(&self) -> (usize, f64) {
        (1..self.modes())
            .map(|i| (i, (self.h[(i, 0)] + self.v(i, 0, 0, 0)).abs()))
            .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best })
    }
}

/// Tensors of the grid modes carried by `ob`. Fails if the condensate mode
/// does not satisfy the Hartree stationarity condition to `10 * scf_tol`.
pub fn compute_tensors(
    ob: &OneBodySet,
    grid: &GridSpec,
    external: &ExternalPotential,
    v: &Interaction,
    scf_tol: f64,
) -> Result<ManyBodyTensors> {
    let modes = &ob
        .grid_modes
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("one-body set carries no grid modes".into()))?
        .modes;
    let m = modes.ncols();
    let nodes = grid.len();
    let weights = grid.weights();
    let vext = external.sample(grid);

    let mut h = DMatrix::zeros(m, m);
    for j in 0..m {
        let col = modes.column(j);
        let mut hj = grid.apply_neg_laplacian(col.as_slice());
        for x in 0..nodes {
            hj[x] += vext[x] * col[x];
        }
        for i in 0..m {
            h[(i, j)] = grid.inner(modes.column(i).as_slice(), &hj);
        }
    }
    let h = (&h + h.transpose()) * 0.5;

    let mut left = DMatrix::zeros(nodes, m * m);
    let mut right = DMatrix::zeros(nodes, m * m);
    for a in 0..m {
        for b in a..m {
            let product: Vec<f64> = (0..nodes).map(|x| modes[(x, a)] * modes[(x, b)]).collect();
            let conv = convolve(v, &product, grid)?;
            for x in 0..nodes {
                let wp = weights[x] * product[x];
                left[(x, a * m + b)] = wp;
                left[(x, b * m + a)] = wp;
                right[(x, a * m + b)] = conv[x];
                right[(x, b * m + a)] = conv[x];
            }
        }
    }
    let gram = left.transpose() * right;
    let g = |t: [usize; 4]| gram[(t[0] * m + t[2], t[1] * m + t[3])];
    let mut vt = vec![0.0; m.pow(4)];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    // Summing the orbit from its smallest member makes the
                    // symmetries hold bit for bit.
                    let rep = *orbit([i, j, k, l]).iter().min().expect("orbit");
                    let sum: f64 = orbit(rep).iter().map(|&t| g(t)).sum();
                    vt[((i * m + j) * m + k) * m + l] = sum / 8.0;
                }
            }
        }
    }

    let t = ManyBodyTensors::from_parts(h, vt, v.at_origin())?;
    let (mode, value) = t.stationarity_defect();
    if value > 10.0 * scf_tol {
        return Err(Error::StationarityViolated { mode, value });
    }
    Ok(t)
}

/// Index permutations under which `v_ijkl` is invariant for real modes
/// and an even interaction.
fn orbit([i, j, k, l]: [usize; 4]) -> [[usize; 4]; 8] {
    [
        [i, j, k, l],
        [k, j, i, l],
        [i, l, k, j],
        [k, l, i, j],
        [j, i, l, k],
        [j, k, l, i],
        [l, i, j, k],
        [l, k, j, i],
    ]
}
