//! Preconditioned descent on the static energy `E(u, 0)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::{h1_norm, static_energy};
use crate::error::{Error, Result};
use crate::grid::{FieldState, Grid1D};
use crate::impurity::ImpurityParams;
use crate::spectrum::{static_residual, SymTridiagonal};
use crate::waves::{ground_state, kink_profile, matching_root};

/// Bound on both the interior and the interface residual at convergence.
pub const RESIDUAL_TOL: f64 = 1e-7;
const ARMIJO: f64 = 1e-4;
/// Tolerance on the prescribed end values of an initial profile.
const END_TOL: f64 = 1e-6;

/// Admissible class of profiles, fixed by the clamped end values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// `u(-L) = u(L) = 0`.
    FreeH1,
    /// `u(-L) = 0`, `u(L) = 2 pi`.
    Degree1,
}

impl Sector {
    pub fn ends(&self) -> (f64, f64) {
        match self {
            Sector::FreeH1 => (0.0, 0.0),
            Sector::Degree1 => (0.0, 2.0 * PI),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnownWave {
    Vacuum,
    GroundState,
    NegatedGroundState,
    Kink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizationReport {
    pub sector: Sector,
    pub q: f64,
    pub final_energy: f64,
    pub nearest: KnownWave,
    /// `H^1` distance to `nearest`.
    pub distance: f64,
    pub iterations: usize,
    pub interior_residual: f64,
    pub gluing_residual: f64,
    /// Energy after each accepted step, starting with the initial profile.
    pub energy_trace: Vec<f64>,
    pub profile: FieldState,
}

impl MinimizationReport {
    pub fn is_monotone(&self) -> bool {
        self.energy_trace.windows(2).all(|w| w[1] <= w[0])
    }
}

/// `(max interior |F_i|, |dx F_0|)`; the second is the discrete form of
/// `u_x(0+) - u_x(0-) - q sin u(0)`.
fn residuals(grid: &Grid1D, u: &[f64], q: f64) -> (Vec<f64>, f64, f64) {
    let r = static_residual(grid, u, q);
    let z = grid.zero_index();
    let interior = r
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != z)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let glue = (grid.dx() * r[z]).abs();
    (r, interior, glue)
}

/// `-D2 + 1 + (|q|/dx) e_0 e_0^T` on the interior nodes.
fn preconditioner(grid: &Grid1D, q: f64) -> SymTridiagonal {
    let n = grid.len();
    let h = grid.dx();
    let inv_h2 = 1.0 / (h * h);
    let mut diag = vec![2.0 * inv_h2 + 1.0; n - 2];
    diag[grid.zero_index() - 1] += q.abs() / h;
    SymTridiagonal::new(diag, vec![-inv_h2; n - 3])
}

fn nearest_wave(profile: &FieldState, q: f64, sector: Sector) -> Result<(KnownWave, f64)> {
    let g = profile.grid();
    let dist = |w: &[f64]| {
        let d: Vec<f64> = profile.u1.iter().zip(w).map(|(a, b)| a - b).collect();
        h1_norm(g, &d)
    };
    let mut best = match sector {
        Sector::FreeH1 => (KnownWave::Vacuum, dist(&vec![0.0; g.len()])),
        Sector::Degree1 => (KnownWave::Kink, dist(&kink_profile(g, 0.0)?.u1)),
    };
    if sector == Sector::FreeH1 && q != 0.0 && matching_root(q)?.exists {
        let gs = ground_state(g, q)?.u1;
        let neg: Vec<f64> = gs.iter().map(|v| -v).collect();
        for (kind, w) in [
            (KnownWave::GroundState, gs),
            (KnownWave::NegatedGroundState, neg),
        ] {
            let d = dist(&w);
            if d < best.1 {
                best = (kind, d);
            }
        }
    }
    Ok(best)
}

/// Descends `E(u, 0)` (sharp δ) from `initial` with an `H^1`-type
/// preconditioner and Armijo backtracking, the ends held at the sector
/// values. Every accepted step lowers the computed energy.
pub fn minimize_energy(
    q: f64,
    sector: Sector,
    initial: &FieldState,
    step_budget: usize,
) -> Result<MinimizationReport> {
    if !q.is_finite() {
        return Err(Error::InvalidParameter(format!("coupling q = {q}")));
    }
    initial.check_finite()?;
    let grid = initial.grid().clone();
    let n = grid.len();
    let (left, right) = sector.ends();
    if (initial.u1[0] - left).abs() > END_TOL || (initial.u1[n - 1] - right).abs() > END_TOL {
        return Err(Error::InvalidParameter(format!(
            "initial profile ends ({}, {}) do not match the {:?} sector values ({left}, {right})",
            initial.u1[0],
            initial.u1[n - 1],
            sector
        )));
    }
    let impurity = ImpurityParams::sharp(q).discretize(&grid)?;
    let pre = preconditioner(&grid, q);
    let mut u = initial.u1.clone();
    u[0] = left;
    u[n - 1] = right;
    let mut e = static_energy(&grid, &u, &impurity);
    let mut trace = vec![e];
    let mut trial = u.clone();
    let mut iterations = 0;
    loop {
        let (r, interior, glue) = residuals(&grid, &u, q);
        if interior <= RESIDUAL_TOL && glue <= RESIDUAL_TOL {
            let profile = FieldState::from_profile(grid.clone(), u)?;
            let (nearest, distance) = nearest_wave(&profile, q, sector)?;
            return Ok(MinimizationReport {
                sector,
                q,
                final_energy: e,
                nearest,
                distance,
                iterations,
                interior_residual: interior,
                gluing_residual: glue,
                energy_trace: trace,
                profile,
            });
        }
        if iterations >= step_budget {
            return Err(Error::NonConvergence(format!(
                "descent budget of {step_budget} steps exhausted (interior residual {interior:e}, gluing residual {glue:e})"
            )));
        }
        iterations += 1;
        let d = pre.solve_shifted(0.0, &r[1..n - 1]);
        // Directional derivative of the energy along -d.
        let slope = -grid.dx() * r[1..n - 1].iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-10 {
            for i in 1..n - 1 {
                trial[i] = u[i] - alpha * d[i - 1];
            }
            let et = static_energy(&grid, &trial, &impurity);
            if et <= e + ARMIJO * alpha * slope {
                accepted = true;
                e = et;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Decrease below rounding: accept only a step that does not raise
            // the computed energy.
            for i in 1..n - 1 {
                trial[i] = u[i] - d[i - 1];
            }
            let et = static_energy(&grid, &trial, &impurity);
            if et > e {
                return Err(Error::NonConvergence(format!(
                    "line search stalled (interior residual {interior:e}, gluing residual {glue:e})"
                )));
            }
            e = et;
        }
        std::mem::swap(&mut u, &mut trial);
        trial[0] = left;
        trial[n - 1] = right;
        trace.push(e);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::new(20.0, 4001).unwrap()
    }

    #[test]
    fn small_bump_relaxes_to_vacuum() {
        let g = grid();
        let init = FieldState::from_profile(g.clone(), g.sample(|x| 0.2 * (-x * x).exp())).unwrap();
        let r = minimize_energy(-1.0, Sector::FreeH1, &init, 10_000).unwrap();
        assert_eq!(r.nearest, KnownWave::Vacuum);
        assert!(r.final_energy.abs() <= 1e-6);
        assert!(r.is_monotone());
        assert!(r.interior_residual <= RESIDUAL_TOL && r.gluing_residual <= RESIDUAL_TOL);
    }

    #[test]
    fn ground_state_is_the_free_minimizer_for_strong_attraction() {
        let g = grid();
        let q = ground_state(&g, -4.0).unwrap();
        let init =
            FieldState::from_profile(g.clone(), q.u1.iter().map(|v| 0.9 * v).collect()).unwrap();
        let r = minimize_energy(-4.0, Sector::FreeH1, &init, 10_000).unwrap();
        assert_eq!(r.nearest, KnownWave::GroundState);
        assert!((r.final_energy + 2.0).abs() <= 1e-4, "{}", r.final_energy);
        assert!(r.is_monotone());
        // negated start goes to -Q
        let neg =
            FieldState::from_profile(g.clone(), init.u1.iter().map(|v| -v).collect()).unwrap();
        let r = minimize_energy(-4.0, Sector::FreeH1, &neg, 10_000).unwrap();
        assert_eq!(r.nearest, KnownWave::NegatedGroundState);
    }

    #[test]
    fn shifted_kink_recenters() {
        let g = grid();
        let k = kink_profile(&g, 1.0).unwrap();
        let r = minimize_energy(-1.0, Sector::Degree1, &k, 10_000).unwrap();
        assert_eq!(r.nearest, KnownWave::Kink);
        assert!((r.final_energy - 6.0).abs() <= 1e-4);
        assert!(r.distance < 1e-3);
        assert!(r.is_monotone());
    }

    #[test]
    fn sector_and_budget_errors() {
        let g = grid();
        let k = kink_profile(&g, 0.0).unwrap();
        assert!(matches!(
            minimize_energy(-1.0, Sector::FreeH1, &k, 10),
            Err(Error::InvalidParameter(_))
        ));
        let shifted = kink_profile(&g, 2.0).unwrap();
        assert!(matches!(
            minimize_energy(-1.0, Sector::Degree1, &shifted, 1),
            Err(Error::NonConvergence(_))
        ));
    }
}
