//! Many-body checks of the Bogoliubov predictions.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::basis::{FockBasis, DEFAULT_CAP};
use super::eigen::{ed_lowest, ED_TOL};
use super::expm::{apply_udagger_condensate, condensate_return_amplitude};
use super::operators::{assemble_hbog, assemble_hn, assemble_x, observables};
use super::tensors::{compute_tensors, ManyBodyTensors};
use crate::bogoliubov::{analyze_with, excitation_levels, predict_ground_energy, BogoliubovResult};
use crate::domain::{ExternalPotential, GridSpec, Interaction};
use crate::error::{Error, Result};
use crate::onebody::{compute_symplectic, q_block, OneBodySet, SymplecticSet};

/// Inequalities are accepted down to this (absolute) slack.
pub const SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdConfig {
    /// Number of eigenstates computed per sector.
    pub k_states: usize,
    pub cap: usize,
}

impl Default for EdConfig {
    fn default() -> Self {
        Self {
            k_states: 5,
            cap: DEFAULT_CAP,
        }
    }
}

/// Everything the sector computations share across particle numbers.
#[derive(Clone, Debug)]
pub struct EdModel {
    pub tensors: ManyBodyTensors,
    /// Diagonal of `D`, index 0 included.
    pub d: Vec<f64>,
    pub d_q: DMatrix<f64>,
    pub v_q: DMatrix<f64>,
    pub bog: BogoliubovResult,
    pub symplectic: SymplecticSet,
    /// `eps_1 - eps_0`.
    pub gap: f64,
}

impl EdModel {
    /// `ob` must hold exactly the `M + 1` modes used in the Fock space.
    pub fn new(
        ob: &OneBodySet,
        grid: &GridSpec,
        external: &ExternalPotential,
        v: &Interaction,
        scf_tol: f64,
    ) -> Result<Self> {
        let tensors = compute_tensors(ob, grid, external, v, scf_tol)?;
        Self::from_parts(ob, tensors)
    }

    pub fn from_parts(ob: &OneBodySet, tensors: ManyBodyTensors) -> Result<Self> {
        if tensors.modes() != ob.size() {
            return Err(Error::LengthMismatch {
                expected: ob.size(),
                got: tensors.modes(),
            });
        }
        let bog = analyze_with(ob, tensors.h00(), tensors.v0000())?;
        let d_q = ob.d_q();
        let symplectic = compute_symplectic(&d_q, &q_block(&bog.e_matrix), ob.gap)?;
        Ok(Self {
            d: (0..ob.size()).map(|i| ob.d[(i, i)]).collect(),
            d_q,
            v_q: ob.v_q(),
            bog,
            symplectic,
            gap: ob.gap,
            tensors,
        })
    }

    pub fn excited_modes(&self) -> usize {
        self.d.len() - 1
    }

    pub fn v_origin(&self) -> f64 {
        self.tensors.v_origin
    }
}

/// Per-eigenstate expectation bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct StateBounds {
    pub energy: f64,
    pub mu: f64,
    pub depletion: f64,
    pub th_expect: f64,
    pub th_bound: f64,
    pub product_expect: f64,
    pub lemma3_bound: f64,
}

impl StateBounds {
    pub fn expval_ok(&self) -> bool {
        self.th_bound - self.th_expect >= -SLACK
    }

    pub fn lemma3_ok(&self, gap: f64) -> bool {
        self.lemma3_bound - gap * self.product_expect >= -SLACK
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremRow {
    pub particles: usize,
    pub dim: usize,
    pub e0_ed: f64,
    pub e0_bog: f64,
    pub delta0: f64,
    pub delta0_sqrt_n: f64,
    pub gap1_ed: f64,
    pub gap1_bog: f64,
    /// `|(E_k - E_0)_ED - (sum e_i n_i)_k|` for `k = 1, 2, ...`.
    pub gap_errors: Vec<f64>,
    pub levels_ed: Vec<f64>,
    pub depletion: f64,
    pub th_expect: f64,
    pub product_expect: f64,
    pub overlap_sq: f64,
    pub bare_overlap_sq: f64,
    /// `E_0 - N h_00 - N/2 v_0000`.
    pub lemma1_excess: f64,
    /// `v_0000/2 - N/(2(N-1)) v(0)`.
    pub lemma1_floor: f64,
    pub lemma1_lower_ok: bool,
    pub lemma1_upper_ok: bool,
    pub states: Vec<StateBounds>,
    /// `eps_1 - eps_0`, the gap multiplying `<N^> T_H>` in the product bound.
    pub onebody_gap: f64,
    pub expval_ok: bool,
    pub lemma3_ok: bool,
    pub hbog_gap1: f64,
    pub hbog_levels: Vec<f64>,
}

impl TheoremRow {
    pub fn all_bounds_ok(&self) -> bool {
        self.lemma1_lower_ok && self.lemma1_upper_ok && self.expval_ok && self.lemma3_ok
    }
}

fn expect(diag: &[f64], v: &[f64]) -> f64 {
    diag.iter().zip(v).map(|(d, a)| d * a * a).sum()
}

/// Exact diagonalization of one sector and the derived comparisons.
pub fn verify_point(model: &EdModel, particles: usize, cfg: &EdConfig) -> Result<TheoremRow> {
    let basis = FockBasis::new(model.excited_modes(), particles, cfg.cap)?;
    let k = cfg.k_states.min(basis.len());
    let t = &model.tensors;
    let n = particles as f64;
    let v0 = model.v_origin();
    let v0000 = t.v0000();

    let hn = assemble_hn(t, &basis)?;
    let ed = ed_lowest(&hn, k)?;
    let e0 = ed.values[0];
    let ground = &ed.vectors[0];

    let e0_bog = predict_ground_energy(&model.bog, particles)?;
    let delta0 = (e0 - e0_bog).abs();
    let levels_ed: Vec<f64> = ed.values.iter().map(|e| e - e0).collect();

    let xi = levels_ed.last().copied().unwrap_or(0.0) * 2.0 + model.bog.e[0];
    let predicted = excitation_levels(&model.bog.e, xi, particles)?;
    let gap_errors: Vec<f64> = levels_ed
        .iter()
        .zip(&predicted)
        .skip(1)
        .map(|(a, b)| (a - b).abs())
        .collect();

    let (nq, th) = observables(&basis, &model.d)?;
    let product: Vec<f64> = nq.iter().zip(&th).map(|(a, b)| a * b).collect();
    let pair = n / (2.0 * (n - 1.0));
    let states: Vec<StateBounds> = ed
        .values
        .iter()
        .zip(&ed.vectors)
        .map(|(&e, psi)| {
            let mu = (e - e0) + ED_TOL * (e.abs() + 1.0);
            let th_bound = mu + pair * v0 - 0.5 * v0000;
            StateBounds {
                energy: e,
                mu,
                depletion: expect(&nq, psi),
                th_expect: expect(&th, psi),
                th_bound,
                product_expect: expect(&product, psi),
                lemma3_bound: (mu - v0000 + 3.0 * v0) * th_bound + 0.25 * (2.0 * v0 + mu).powi(2),
            }
        })
        .collect();

    let x = assemble_x(&model.symplectic.alpha, &basis)?;
    let dressed = apply_udagger_condensate(&x, &basis)?;
    let overlap: f64 = ground.iter().zip(&dressed).map(|(a, b)| a * b).sum();

    let hbog = assemble_hbog(&model.d_q, &model.v_q, &basis)?;
    let bog_ed = ed_lowest(&hbog, k)?;
    let hbog_levels: Vec<f64> = bog_ed.values.iter().map(|e| e - bog_ed.values[0]).collect();

    let lemma1_excess = e0 - n * t.h00() - 0.5 * n * v0000;
    let lemma1_floor = 0.5 * v0000 - pair * v0;
    Ok(TheoremRow {
        particles,
        dim: basis.len(),
        e0_ed: e0,
        e0_bog,
        delta0,
        delta0_sqrt_n: delta0 * n.sqrt(),
        gap1_ed: levels_ed.get(1).copied().unwrap_or(f64::NAN),
        gap1_bog: model.bog.e[0],
        gap_errors,
        depletion: states[0].depletion,
        th_expect: states[0].th_expect,
        product_expect: states[0].product_expect,
        overlap_sq: overlap * overlap,
        bare_overlap_sq: ground[0] * ground[0],
        lemma1_excess,
        lemma1_floor,
        lemma1_lower_ok: lemma1_excess - lemma1_floor >= -SLACK,
        lemma1_upper_ok: -lemma1_excess >= -SLACK,
        expval_ok: states.iter().all(|s| s.expval_ok()),
        lemma3_ok: states.iter().all(|s| s.lemma3_ok(model.gap)),
        states,
        onebody_gap: model.gap,
        hbog_gap1: hbog_levels.get(1).copied().unwrap_or(f64::NAN),
        hbog_levels,
        levels_ed,
    })
}

/// Runs [`verify_point`] for every particle number, concurrently; rows come
/// back in the order of `particles`.
pub fn verify_theorem(model: &EdModel, particles: &[usize], cfg: &EdConfig) -> Result<Vec<TheoremRow>> {
    particles
        .par_iter()
        .map(|&n| verify_point(model, n, cfg))
        .collect()
}

/// One named pass/fail check over a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendCheck {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

impl TrendCheck {
    fn new(name: impl Into<String>, value: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            passed,
        }
    }
}

fn strictly(rows: &[TheoremRow], f: impl Fn(&TheoremRow) -> f64, decreasing: bool) -> bool {
    rows.windows(2).all(|w| {
        let (a, b) = (f(&w[0]), f(&w[1]));
        if decreasing {
            b < a
        } else {
            b > a
        }
    })
}

/// Convergence checks over rows ordered by ascending `N`.
///
/// `value` holds the quantity the check thresholds: the spread
/// `max/min` of `delta0 sqrt(N)`, the relative gap error at the largest `N`,
/// and the ratio of fitted constants `C = (1 - overlap_sq) sqrt(N)` between
/// the two largest `N`.
pub fn sweep_checks(rows: &[TheoremRow]) -> Vec<TrendCheck> {
    let mut out = Vec::new();
    for r in rows {
        let n = r.particles;
        out.push(TrendCheck::new(format!("lemma1_bracket_N{n}"), r.lemma1_excess, r.lemma1_lower_ok && r.lemma1_upper_ok));
        out.push(TrendCheck::new(format!("expval_bounds_N{n}"), r.states.len() as f64, r.expval_ok));
        out.push(TrendCheck::new(format!("lemma3_bounds_N{n}"), r.states.len() as f64, r.lemma3_ok));
        out.push(TrendCheck::new(
            format!("bare_below_overlap_N{n}"),
            r.overlap_sq - r.bare_overlap_sq,
            r.bare_overlap_sq < r.overlap_sq,
        ));
    }
    let Some(last) = rows.last() else {
        return out;
    };

    out.push(TrendCheck::new("delta0_decreasing", last.delta0, strictly(rows, |r| r.delta0, true)));
    let scaled: Vec<f64> = rows.iter().map(|r| r.delta0_sqrt_n).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = max / min;
    out.push(TrendCheck::new("delta0_sqrtN_spread", spread, min > 0.0 && spread < 3.0));

    let gap_error = |r: &TheoremRow| (r.gap1_ed - r.gap1_bog).abs();
    out.push(TrendCheck::new("gap_error_decreasing", gap_error(last), strictly(rows, gap_error, true)));
    let rel = gap_error(last) / last.gap1_bog;
    out.push(TrendCheck::new("gap_error_relative", rel, rel < 0.05));

    out.push(TrendCheck::new("overlap_increasing", last.overlap_sq, strictly(rows, |r| r.overlap_sq, false)));
    if rows.len() >= 2 {
        let fit = |r: &TheoremRow| (1.0 - r.overlap_sq) * (r.particles as f64).sqrt();
        let ratio = fit(last) / fit(&rows[rows.len() - 2]);
        out.push(TrendCheck::new("overlap_constant_stable", ratio, (ratio - 1.0).abs() <= 0.5));
    }
    out
}

/// Central second difference of `t -> <N,0,...|e^{-tX}|N,0,...>` at 0,
/// alongside the closed form `-N/(2(N-1)) ||alpha||_HS^2`.
pub fn return_amplitude_curvature(model: &EdModel, particles: usize, step: f64, cap: usize) -> Result<(f64, f64)> {
    let basis = FockBasis::new(model.excited_modes(), particles, cap)?;
    let x = assemble_x(&model.symplectic.alpha, &basis)?;
    let plus = condensate_return_amplitude(&x, step, &basis)?;
    let minus = condensate_return_amplitude(&x, -step, &basis)?;
    let fd = (plus - 2.0 + minus) / (step * step);
    let n = particles as f64;
    let hs = model.symplectic.alpha_hs_norm();
    Ok((fd, -n / (2.0 * (n - 1.0)) * hs * hs))
}
