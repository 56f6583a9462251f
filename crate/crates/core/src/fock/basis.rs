//! Occupation-number basis of the `N`-particle sector.
//!
//! States are ordered lexicographically descending, so `|N,0,...,0>` is
//! index 0 and the ordering is graded by `N - n_0`.

use crate::error::{Error, Result};

pub const DEFAULT_CAP: usize = 500_000;

#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: usize,
    particles: usize,
    occupations: Vec<u16>,
    // binom[n][k] = C(n, k) for n <= particles + modes.
    binom: Vec<Vec<u64>>,
}

/// `C(n + k, k)` without overflow for the sizes we care about.
pub fn sector_dimension(modes: usize, particles: usize) -> u128 {
    let k = modes.saturating_sub(1) as u128;
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c * (particles as u128 + i) / i;
    }
    c
}

impl FockBasis {
    /// `excited` is `M`, the number of modes besides the condensate.
    pub fn new(excited: usize, particles: usize, cap: usize) -> Result<Self> {
        if excited < 1 {
            return Err(Error::InvalidArgument("need at least one excited mode".into()));
        }
        if particles < 2 {
            return Err(Error::InvalidArgument(format!("need N >= 2, got {particles}")));
        }
        if particles > u16::MAX as usize {
            return Err(Error::InvalidArgument(format!("N = {particles} too large")));
        }
        let modes = excited + 1;
        let size = sector_dimension(modes, particles);
        if size > cap as u128 {
            return Err(Error::BasisTooLarge { size, cap });
        }
        let top = particles + modes;
        let mut binom = vec![vec![0u64; top + 1]; top + 1];
        for n in 0..=top {
            binom[n][0] = 1;
            for k in 1..=n {
                binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0 };
            }
        }
        let mut occupations = Vec::with_capacity(size as usize * modes);
        let mut state = vec![0u16; modes];
        fill(&mut state, 0, particles, &mut occupations);
        Ok(Self {
            modes,
            particles,
            occupations,
            binom,
        })
    }

    /// `M + 1`.
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.occupations.len() / self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn state(&self, index: usize) -> &[u16] {
        &self.occupations[index * self.modes..(index + 1) * self.modes]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u16]> {
        self.occupations.chunks_exact(self.modes)
    }

    /// Position of `state` in the basis, or `None` if it is not in the sector.
    pub fn index(&self, state: &[u16]) -> Option<usize> {
        if state.len() != self.modes {
            return None;
        }
        if state.iter().map(|&n| n as usize).sum::<usize>() != self.particles {
            return None;
        }
        Some(self.rank(state))
    }

    /// Rank of a valid state; the caller guarantees membership.
    pub(crate) fn rank(&self, state: &[u16]) -> usize {
        let mut remaining = self.particles;
        let mut rank = 0u64;
        for (i, &n) in state.iter().enumerate().take(self.modes - 1) {
            let n = n as usize;
            let k = self.modes - i;
            // States with a larger occupation here come first:
            // sum_{v > n} C(remaining - v + k - 2, k - 2) = C(remaining - n - 1 + k - 1, k - 1).
            if remaining > n {
                rank += self.binom[remaining - n - 1 + k - 1][k - 1];
            }
            remaining -= n;
        }
        rank as usize
    }
}

fn fill(state: &mut [u16], pos: usize, remaining: usize, out: &mut Vec<u16>) {
    if pos == state.len() - 1 {
        state[pos] = remaining as u16;
        out.extend_from_slice(state);
        return;
    }
    for n in (0..=remaining).rev() {
        state[pos] = n as u16;
        fill(state, pos + 1, remaining - n, out);
    }
    state[pos] = 0;
}
