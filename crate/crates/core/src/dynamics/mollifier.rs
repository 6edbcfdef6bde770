use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Reference bump `exp(-1/(1-s^2))` on `|s| < 1` (unnormalized).
pub fn reference_bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Discrete mollifier `rho_eps(x) = eps^-1 rho(x/eps)`, renormalized so
/// that its trapezoid mass is one on the grid it was sampled on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierProfile {
    pub eps: f64,
    pub samples: Vec<f64>,
    pub mass: f64,
    support: (usize, usize),
}

impl MollifierProfile {
    /// Inclusive node range where the samples are nonzero.
    pub fn support(&self) -> (usize, usize) {
        self.support
    }

    /// Trapezoid pairing `<rho_eps, u>`.
    pub fn pair(&self, grid: &Grid1D, u: &[f64]) -> f64 {
        let (lo, hi) = self.support;
        (lo..=hi)
            .map(|i| grid.weight(i) * self.samples[i] * u[i])
            .sum()
    }
}

pub fn mollifier_profile(grid: &Grid1D, eps: f64) -> Result<MollifierProfile> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mollifier width must be positive, got {eps}"
        )));
    }
    // Small slack so that eps = 2 dx computed in floating point still passes.
    if eps < 2.0 * grid.dx() * (1.0 - 1e-12) {
        return Err(Error::UnresolvedMollifier { eps, dx: grid.dx() });
    }
    if eps >= grid.half_width() {
        return Err(Error::InvalidParameter(format!(
            "mollifier width {eps} does not fit inside the domain"
        )));
    }
    let mut samples = grid.sample(|x| reference_bump(x / eps) / eps);
    let raw = grid.integrate(&samples);
    for s in &mut samples {
        *s /= raw;
    }
    let mass = grid.integrate(&samples);
    let first = samples
        .iter()
        .position(|&s| s > 0.0)
        .unwrap_or(grid.zero_index());
    let last = samples
        .iter()
        .rposition(|&s| s > 0.0)
        .unwrap_or(grid.zero_index());
    Ok(MollifierProfile {
        eps,
        samples,
        mass,
        support: (first, last),
    })
}
