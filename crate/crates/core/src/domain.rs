//! Discretizations, external potentials and pair interactions.
//!
//! Two one-dimensional grids are supported: a Dirichlet box `[-L, L]` that
//! stands in for the real line in the trapped case, and the periodic unit
//! torus `[0, 1)`. Plane-wave mode lattices in `d = 1, 2, 3` are provided for
//! the closed-form torus oracle.
//!
//! Functions on a grid are stored on every node. On the box the two endpoint
//! nodes carry the Dirichlet condition and are always zero.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const MIN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    DirichletBox,
    PeriodicTorus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    kind: GridKind,
    half_width: f64,
    n: usize,
    h: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl GridSpec {
    /// Box `[-L, L]` split into `n` cells: `n + 1` nodes with trapezoid weights.
    pub fn dirichlet_box(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidDiscretization(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        check_points(n)?;
        let h = 2.0 * half_width / n as f64;
        let points = (0..=n).map(|j| -half_width + j as f64 * h).collect();
        let mut weights = vec![h; n + 1];
        weights[0] = 0.5 * h;
        weights[n] = 0.5 * h;
        Ok(Self {
            kind: GridKind::DirichletBox,
            half_width,
            n,
            h,
            points,
            weights,
        })
    }

    /// Unit torus with `n` equispaced nodes `j / n`.
    pub fn periodic_torus(n: usize) -> Result<Self> {
        check_points(n)?;
        let h = 1.0 / n as f64;
        Ok(Self {
            kind: GridKind::PeriodicTorus,
            half_width: 0.5,
            n,
            h,
            points: (0..n).map(|j| j as f64 * h).collect(),
            weights: vec![h; n],
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_periodic(&self) -> bool {
        self.kind == GridKind::PeriodicTorus
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Number of stored nodes.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain_length(&self) -> f64 {
        match self.kind {
            GridKind::DirichletBox => 2.0 * self.half_width,
            GridKind::PeriodicTorus => 1.0,
        }
    }

    /// Nodes that carry degrees of freedom (all but the Dirichlet endpoints).
    pub fn unknowns(&self) -> std::ops::Range<usize> {
        match self.kind {
            GridKind::DirichletBox => 1..self.n,
            GridKind::PeriodicTorus => 0..self.n,
        }
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns().len()
    }

    /// Quadrature weight shared by every unknown node.
    pub fn unknown_weight(&self) -> f64 {
        self.h
    }

    pub fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        Ok(())
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((f, g), w)| f * g * w)
            .sum()
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// Signed separation `x_i - x_j` as a function of the index offset
    /// `i - j`; on the torus it is reduced into `[-1/2, 1/2)`.
    pub fn offset_displacement(&self, offset: isize) -> f64 {
        match self.kind {
            GridKind::DirichletBox => offset as f64 * self.h,
            GridKind::PeriodicTorus => {
                let k = offset.rem_euclid(self.n as isize) as usize;
                if 2 * k >= self.n {
                    (k as f64 - self.n as f64) * self.h
                } else {
                    k as f64 * self.h
                }
            }
        }
    }

    /// `-f''` by the three-point stencil. Dirichlet endpoints are left at zero.
    pub fn apply_neg_laplacian(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        let inv_h2 = 1.0 / (self.h * self.h);
        let mut out = vec![0.0; n];
        match self.kind {
            GridKind::DirichletBox => {
                for i in 1..n - 1 {
                    out[i] = (2.0 * f[i] - f[i - 1] - f[i + 1]) * inv_h2;
                }
            }
            GridKind::PeriodicTorus => {
                for i in 0..n {
                    let left = f[(i + n - 1) % n];
                    let right = f[(i + 1) % n];
                    out[i] = (2.0 * f[i] - left - right) * inv_h2;
                }
            }
        }
        out
    }

    /// Symbol of the discrete `-d^2/dx^2` on a plane wave of momentum `p`.
    pub fn stencil_symbol(&self, p: f64) -> f64 {
        stencil_symbol(p, self.h)
    }
}

/// `2 (1 - cos(p h)) / h^2`, the eigenvalue of the three-point stencil.
pub fn stencil_symbol(p: f64, h: f64) -> f64 {
    let s = (0.5 * p * h).sin();
    4.0 * s * s / (h * h)
}

fn check_points(n: usize) -> Result<()> {
    if n < MIN_POINTS {
        return Err(Error::InvalidDiscretization(format!(
            "need at least {MIN_POINTS} points, got {n}"
        )));
    }
    Ok(())
}

/// Plane-wave modes `p = 2 pi k`, `k in Z^d`, `|k_j| <= K`, in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeBasis {
    dim: usize,
    cutoff: usize,
    labels: Vec<Vec<i64>>,
}

impl ModeBasis {
    pub fn new(dim: usize, cutoff: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDiscretization(format!(
                "mode dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if cutoff < 1 {
            return Err(Error::InvalidDiscretization("mode cutoff must be >= 1".into()));
        }
        let k = cutoff as i64;
        let mut labels: Vec<Vec<i64>> = vec![Vec::new()];
        for _ in 0..dim {
            labels = labels
                .into_iter()
                .flat_map(|prefix| {
                    (-k..=k).map(move |c| {
                        let mut next = prefix.clone();
                        next.push(c);
                        next
                    })
                })
                .collect();
        }
        Ok(Self { dim, cutoff, labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Vec<i64>] {
        &self.labels
    }

    pub fn momentum(&self, index: usize) -> Vec<f64> {
        self.labels[index]
            .iter()
            .map(|&k| 2.0 * PI * k as f64)
            .collect()
    }

    pub fn momenta(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.momentum(i))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Discretization {
    Grid(GridSpec),
    Modes(ModeBasis),
}

/// What a run asks to discretize.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiscretizationRequest {
    Box { half_width: f64, points: usize },
    Torus { points: usize },
    Modes { dim: usize, cutoff: usize },
}

pub fn make_discretization(request: &DiscretizationRequest) -> Result<Discretization> {
    match *request {
        DiscretizationRequest::Box { half_width, points } => {
            GridSpec::dirichlet_box(half_width, points).map(Discretization::Grid)
        }
        DiscretizationRequest::Torus { points } => {
            GridSpec::periodic_torus(points).map(Discretization::Grid)
        }
        DiscretizationRequest::Modes { dim, cutoff } => {
            ModeBasis::new(dim, cutoff).map(Discretization::Modes)
        }
    }
}

/// Confining potential for the trapped case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExternalPotential {
    /// `omega^2 x^2`; the linear ground-state energy is `omega`.
    Harmonic { omega: f64 },
    /// `kappa x^4`.
    Quartic { kappa: f64 },
    None,
}

impl ExternalPotential {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ExternalPotential::Harmonic { omega } => omega * omega * x * x,
            ExternalPotential::Quartic { kappa } => kappa * x * x * x * x,
            ExternalPotential::None => 0.0,
        }
    }

    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        grid.points().iter().map(|&x| self.eval(x)).collect()
    }
}

/// Pair interaction `v(x - y)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Interaction {
    /// `g exp(-x^2 / (2 s^2))`.
    Gaussian { g: f64, s: f64 },
    /// Periodic cosine series `c_0 + sum_k c_k cos(2 pi k x)` on the unit torus.
    /// In `d > 1` each `c_k` term is summed over the coordinate axes.
    CosineSeries { coeffs: Vec<f64> },
    Zero,
}

impl Interaction {
    /// `g (1 + cos 2 pi x)`.
    pub fn cosine_torus(g: f64) -> Self {
        Interaction::CosineSeries {
            coeffs: vec![g, g],
        }
    }

    pub fn is_torus_kind(&self) -> bool {
        matches!(self, Interaction::CosineSeries { .. })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Interaction::Gaussian { g, s } => g * (-x * x / (2.0 * s * s)).exp(),
            Interaction::CosineSeries { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * (2.0 * PI * k as f64 * x).cos())
                .sum(),
            Interaction::Zero => 0.0,
        }
    }

    /// `v(0)`; for positive-type interactions this is also `sup |v|`.
    pub fn at_origin(&self) -> f64 {
        self.at_origin_in(1)
    }

    pub fn at_origin_in(&self, dim: usize) -> f64 {
        match self {
            Interaction::Gaussian { g, .. } => *g,
            Interaction::CosineSeries { coeffs } => {
                coeffs.first().copied().unwrap_or(0.0)
                    + dim as f64 * coeffs.iter().skip(1).sum::<f64>()
            }
            Interaction::Zero => 0.0,
        }
    }
}

/// `v_hat(p) = int v(x) e^{-i p x} dx`, over `R^d` for the gaussian and over
/// the unit torus for cosine series.
pub fn fourier_coefficient(v: &Interaction, p: &[f64]) -> f64 {
    match v {
        Interaction::Gaussian { g, s } => {
            let p2: f64 = p.iter().map(|c| c * c).sum();
            g * (s * (2.0 * PI).sqrt()).powi(p.len() as i32) * (-0.5 * s * s * p2).exp()
        }
        Interaction::CosineSeries { coeffs } => {
            let labels: Vec<i64> = p.iter().map(|c| (c / (2.0 * PI)).round() as i64).collect();
            let on_lattice = p
                .iter()
                .zip(&labels)
                .all(|(c, &k)| (c - 2.0 * PI * k as f64).abs() <= 1e-9 * (1.0 + c.abs()));
            if !on_lattice {
                return 0.0;
            }
            let nonzero: Vec<i64> = labels.iter().copied().filter(|&k| k != 0).collect();
            match nonzero.len() {
                0 => coeffs.first().copied().unwrap_or(0.0),
                1 => {
                    let k = nonzero[0].unsigned_abs() as usize;
                    coeffs.get(k).map_or(0.0, |c| 0.5 * c)
                }
                _ => 0.0,
            }
        }
        Interaction::Zero => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositiveTypeReport {
    pub min_coefficient: f64,
    pub argmin_momentum: f64,
    pub threshold: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Checks `v_hat >= 0` on the grid's dual lattice using the quadrature
/// transform of the grid samples of `v`.
pub fn validate_positive_type(v: &Interaction, grid: &GridSpec) -> PositiveTypeReport {
    let momenta: Vec<f64> = match grid.kind() {
        GridKind::PeriodicTorus => (0..=grid.cells() / 2).map(|k| 2.0 * PI * k as f64).collect(),
        GridKind::DirichletBox => (0..=grid.cells())
            .map(|k| PI * k as f64 / grid.half_width())
            .collect(),
    };
    let samples: Vec<f64> = match grid.kind() {
        GridKind::PeriodicTorus => (0..grid.len())
            .map(|j| v.eval(grid.offset_displacement(j as isize)))
            .collect(),
        GridKind::DirichletBox => grid.points().iter().map(|&x| v.eval(x)).collect(),
    };
    let xs: Vec<f64> = match grid.kind() {
        GridKind::PeriodicTorus => (0..grid.len())
            .map(|j| grid.offset_displacement(j as isize))
            .collect(),
        GridKind::DirichletBox => grid.points().to_vec(),
    };
    let mut min_coefficient = f64::INFINITY;
    let mut argmin_momentum = 0.0;
    for &p in &momenta {
        let coeff: f64 = samples
            .iter()
            .zip(&xs)
            .zip(grid.weights())
            .map(|((v, x), w)| w * v * (p * x).cos())
            .sum();
        if coeff < min_coefficient {
            min_coefficient = coeff;
            argmin_momentum = p;
        }
    }
    let threshold = -1e-10 * v.at_origin().abs();
    PositiveTypeReport {
        min_coefficient,
        argmin_momentum,
        threshold,
        samples: momenta.len(),
        passed: min_coefficient >= threshold,
    }
}

/// Table of `v(x_i - x_j)` indexed by `i - j + (len - 1)`.
fn kernel_table(v: &Interaction, grid: &GridSpec) -> Vec<f64> {
    let n = grid.len() as isize;
    (-(n - 1)..n)
        .map(|offset| v.eval(grid.offset_displacement(offset)))
        .collect()
}

/// `(v * f)(x_i) = sum_j w_j v(x_i - x_j) f(x_j)` by direct summation.
pub fn convolve(v: &Interaction, f: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    grid.check_len(f)?;
    if matches!(v, Interaction::Zero) {
        return Ok(vec![0.0; f.len()]);
    }
    let n = grid.len();
    let kernel = kernel_table(v, grid);
    let weighted: Vec<f64> = f.iter().zip(grid.weights()).map(|(f, w)| f * w).collect();
    let out = match grid.kind() {
        GridKind::PeriodicTorus => (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| kernel[n - 1 + k] * weighted[(i + n - k) % n])
                    .sum()
            })
            .collect(),
        GridKind::DirichletBox => (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| kernel[n - 1 + i - j] * weighted[j])
                    .sum()
            })
            .collect(),
    };
    Ok(out)
}

/// Mean-field potential `v * rho` for a density `rho >= 0`.
pub fn convolve_density(v: &Interaction, rho: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    grid.check_len(rho)?;
    if let Some(node) = rho.iter().position(|&r| r < 0.0 || !r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "density must be nonnegative, node {node} has {}",
            rho[node]
        )));
    }
    convolve(v, rho, grid)
}
