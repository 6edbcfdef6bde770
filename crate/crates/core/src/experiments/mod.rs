//! Scripted numerical experiments: stability and instability trials,
//! scattering sweeps, energy minimization and mollifier convergence.
//!
//! Every experiment is deterministic for a given configuration and seed.
//! Independent jobs run in parallel and are merged in input order.

mod minimize;
mod mollified;
mod scattering;
mod trials;

pub use minimize::{minimize_energy, KnownWave, MinimizationReport, Sector};
pub use mollified::{mollified_convergence, MollifiedConvergence, MollifiedRow};
pub use scattering::{
    scattering_sweep, ScatterClass, ScatterConfig, ScatterOutcome, CENTER_THRESHOLD,
};
pub use trials::{
    instability_trial, perturbation_direction, stability_trial, AmplitudeRow, InstabilityReport,
    StabilityReport, StabilityVerdict,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// `H^1 x L^2` deviation at which a trajectory counts as having left the
/// neighbourhood of the wave.
pub const ESCAPE_THRESHOLD: f64 = 0.1;

/// Acceptance bound on `sup_t deviation / initial deviation`.
pub const STABILITY_CONSTANT: f64 = 10.0;

/// Discretization and bookkeeping shared by the trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub grid: Grid1D,
    pub dt: f64,
    /// Time between deviation samples.
    pub sample_interval: f64,
    pub seed: u64,
}

impl TrialConfig {
    pub fn new(grid: Grid1D, dt: f64) -> Result<Self> {
        let cfg = Self {
            sample_interval: 0.1,
            seed: 0,
            grid,
            dt,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sample_interval(mut self, interval: f64) -> Self {
        self.sample_interval = interval;
        self
    }

    pub fn validate(&self) -> Result<()> {
        crate::dynamics::check_cfl(&self.grid, self.dt)?;
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample interval {}",
                self.sample_interval
            )));
        }
        Ok(())
    }

    /// Leapfrog steps between samples (at least one).
    pub(crate) fn stride(&self) -> usize {
        ((self.sample_interval / self.dt).round() as usize).max(1)
    }
}

impl Default for TrialConfig {
    /// `L = 20`, `N = 4001`, `dt = dx / 2`.
    fn default() -> Self {
        let grid = Grid1D::new(crate::DEFAULT_HALF_WIDTH, crate::DEFAULT_NODE_COUNT)
            .expect("default grid is valid");
        let dt = 0.5 * grid.dx();
        Self {
            grid,
            dt,
            sample_interval: 0.1,
            seed: 0,
        }
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Random smooth profile with peak `amplitude`, vanishing at both ends.
/// Deterministic in `seed`.
pub fn random_small_profile(g: &Grid1D, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let l = g.half_width();
    let mut v = g.sample(|x| {
        let env = (-x * x / 8.0).exp();
        env * coef
            .iter()
            .enumerate()
            .map(|(j, c)| c * ((j + 1) as f64 * std::f64::consts::PI * (x + l) / (2.0 * l)).sin())
            .sum::<f64>()
    });
    let top = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let n = v.len();
    v.iter_mut().for_each(|a| *a *= amplitude / top);
    v[0] = 0.0;
    v[n - 1] = 0.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_a_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|t| 2.5 * t - 1.0).collect();
        let (a, b) = linear_fit(&x, &y).unwrap();
        assert!((a - 2.5).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[2.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn default_config_is_half_cfl() {
        let c = TrialConfig::default();
        assert_eq!(c.grid.len(), 4001);
        assert!((c.dt - 0.005).abs() < 1e-15);
        assert_eq!(c.stride(), 20);
        assert!(TrialConfig::new(c.grid.clone(), 0.02).is_err());
    }
}
