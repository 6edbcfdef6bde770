//! Coupling to the point impurity at `x = 0`, in its sharp and mollified
//! discretizations.
//!
//! Sharp mode puts the weight `1/dx` on the origin node, so the impurity
//! energy is `q (1 - cos u(0))` and its force is `-(q/dx) sin u(0)` on the
//! origin node only. Mollified mode replaces the point mass by a normalized
//! bump `rho_eps` and couples through the scalar pairing `<rho_eps, u>`.

use serde::{Deserialize, Serialize};

use crate::dynamics::mollifier::{mollifier_profile, MollifierProfile};
use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// How the mollified nonlinearity is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MollifierCoupling {
    /// `q rho(x) sin(<rho, u>)`, energy `q (1 - cos <rho, u>)`.
    #[default]
    Pairing,
    /// `q rho(x) sin(u(x))`, energy `q int rho (1 - cos u)`.
    Pointwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeltaMode {
    Sharp,
    Mollified {
        eps: f64,
        #[serde(default)]
        coupling: MollifierCoupling,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpurityParams {
    pub q: f64,
    pub delta_mode: DeltaMode,
}

impl ImpurityParams {
    pub fn sharp(q: f64) -> Self {
        Self {
            q,
            delta_mode: DeltaMode::Sharp,
        }
    }

    pub fn mollified(q: f64, eps: f64) -> Self {
        Self {
            q,
            delta_mode: DeltaMode::Mollified {
                eps,
                coupling: MollifierCoupling::Pairing,
            },
        }
    }

    pub fn with_coupling(mut self, coupling: MollifierCoupling) -> Self {
        if let DeltaMode::Mollified { coupling: c, .. } = &mut self.delta_mode {
            *c = coupling;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.q.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling q = {}", self.q)));
        }
        if let DeltaMode::Mollified { eps, .. } = self.delta_mode {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "mollifier width must be positive, got {eps}"
                )));
            }
        }
        Ok(())
    }

    /// Prepares the impurity on a grid (samples the mollifier if needed).
    pub fn discretize(&self, grid: &Grid1D) -> Result<DiscreteImpurity> {
        self.validate()?;
        Ok(match self.delta_mode {
            DeltaMode::Sharp => DiscreteImpurity::Sharp {
                q: self.q,
                zero: grid.zero_index(),
                inv_dx: 1.0 / grid.dx(),
            },
            DeltaMode::Mollified { eps, coupling } => DiscreteImpurity::Mollified {
                q: self.q,
                coupling,
                profile: mollifier_profile(grid, eps)?,
            },
        })
    }
}

/// Impurity attached to a particular grid.
#[derive(Debug, Clone)]
pub enum DiscreteImpurity {
    Sharp {
        q: f64,
        zero: usize,
        inv_dx: f64,
    },
    Mollified {
        q: f64,
        coupling: MollifierCoupling,
        profile: MollifierProfile,
    },
}

impl DiscreteImpurity {
    pub fn q(&self) -> f64 {
        match self {
            Self::Sharp { q, .. } | Self::Mollified { q, .. } => *q,
        }
    }

    /// Impurity contribution to the energy.
    pub fn energy(&self, grid: &Grid1D, u1: &[f64]) -> f64 {
        match self {
            Self::Sharp { q, zero, .. } => q * (1.0 - u1[*zero].cos()),
            Self::Mollified {
                q,
                coupling,
                profile,
            } => match coupling {
                MollifierCoupling::Pairing => q * (1.0 - profile.pair(grid, u1).cos()),
                MollifierCoupling::Pointwise => {
                    let (lo, hi) = profile.support();
                    let s: f64 = (lo..=hi)
                        .map(|i| grid.weight(i) * profile.samples[i] * (1.0 - u1[i].cos()))
                        .sum();
                    q * s
                }
            },
        }
    }

    /// Adds the impurity force (per unit trapezoid weight) to `acc` on the
    /// nodes `1..N-1`. Boundary nodes are left alone.
    pub fn add_force(&self, grid: &Grid1D, u1: &[f64], acc: &mut [f64]) {
        match self {
            Self::Sharp { q, zero, inv_dx } => {
                acc[*zero] -= q * inv_dx * u1[*zero].sin();
            }
            Self::Mollified {
                q,
                coupling,
                profile,
            } => {
                let (lo, hi) = profile.support();
                let n = u1.len();
                let lo = lo.max(1);
                let hi = hi.min(n - 2);
                match coupling {
                    MollifierCoupling::Pairing => {
                        let s = q * profile.pair(grid, u1).sin();
                        for i in lo..=hi {
                            acc[i] -= s * profile.samples[i];
                        }
                    }
                    MollifierCoupling::Pointwise => {
                        for i in lo..=hi {
                            acc[i] -= q * profile.samples[i] * u1[i].sin();
                        }
                    }
                }
            }
        }
    }
}
