//! Closed-form translation-invariant spectrum on the flat unit torus.
//!
//! With a constant condensate, `D` and `V` are both diagonal in plane waves
//! and `e_p = sqrt(p^4 + 2 p^2 v_hat(p))`.

use crate::domain::{fourier_coefficient, stencil_symbol, Interaction, ModeBasis};
use crate::error::{Error, Result};

pub fn torus_dispersion(p2: f64, vhat: f64) -> Result<f64> {
    if vhat < 0.0 {
        return Err(Error::NegativeFourier(vhat));
    }
    Ok((p2 * p2 + 2.0 * p2 * vhat).sqrt())
}

/// How `p^2` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dispersion {
    /// Exact `|p|^2`.
    Continuum,
    /// Symbol of the three-point stencil with spacing `h`, summed over axes.
    Stencil { h: f64 },
}

impl Dispersion {
    pub fn kinetic(&self, p: &[f64]) -> f64 {
        match *self {
            Dispersion::Continuum => p.iter().map(|c| c * c).sum(),
            Dispersion::Stencil { h } => p.iter().map(|&c| stencil_symbol(c, h)).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusMode {
    pub label: Vec<i64>,
    pub kinetic: f64,
    pub vhat: f64,
    pub e: f64,
}

impl TorusMode {
    pub fn is_zero(&self) -> bool {
        self.label.iter().all(|&k| k == 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusSpectrum {
    pub basis: ModeBasis,
    pub modes: Vec<TorusMode>,
    /// `sum_p (p^2 + v_hat(p) - e_p)` over the kept modes, `p = 0` included.
    pub trace_sum: f64,
}

impl TorusSpectrum {
    /// Excitation energies (zero mode excluded), ascending.
    pub fn excitations(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .modes
            .iter()
            .filter(|m| !m.is_zero())
            .map(|m| m.e)
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn mode(&self, label: &[i64]) -> Option<&TorusMode> {
        self.modes.iter().find(|m| m.label == label)
    }
}

pub fn torus_spectrum(basis: &ModeBasis, v: &Interaction, dispersion: Dispersion) -> Result<TorusSpectrum> {
    let mut modes = Vec::with_capacity(basis.len());
    let mut trace_sum = 0.0;
    for (i, label) in basis.labels().iter().enumerate() {
        let p = basis.momentum(i);
        let kinetic = dispersion.kinetic(&p);
        let vhat = fourier_coefficient(v, &p);
        let e = torus_dispersion(kinetic, vhat)?;
        trace_sum += kinetic + vhat - e;
        modes.push(TorusMode {
            label: label.clone(),
            kinetic,
            vhat,
            e,
        });
    }
    Ok(TorusSpectrum {
        basis: basis.clone(),
        modes,
        trace_sum,
    })
}
