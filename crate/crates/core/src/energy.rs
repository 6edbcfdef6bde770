//! Conserved energy, energy-space norms and related diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{FieldState, Grid1D};
use crate::impurity::{DiscreteImpurity, ImpurityParams};

/// Parts of the conserved energy. `total` is the sum of the other four
/// fields, computed once at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub gradient: f64,
    pub potential: f64,
    pub delta_term: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(kinetic: f64, gradient: f64, potential: f64, delta_term: f64) -> Self {
        Self {
            kinetic,
            gradient,
            potential,
            delta_term,
            total: kinetic + gradient + potential + delta_term,
        }
    }
}

/// Energy of `state` for the given impurity.
///
/// The gradient part is the edge sum `1/2 sum (u_{i+1} - u_i)^2 / dx`, which
/// is the quadratic form of the three-point Laplacian used by the time
/// stepper; with it the discrete energy is the exact Hamiltonian of the
/// semi-discrete system.
pub fn energy(state: &FieldState, params: &ImpurityParams) -> Result<EnergyBreakdown> {
    let impurity = params.discretize(state.grid())?;
    Ok(energy_with(state.grid(), &state.u1, &state.u2, &impurity))
}

pub(crate) fn energy_with(
    grid: &Grid1D,
    u1: &[f64],
    u2: &[f64],
    impurity: &DiscreteImpurity,
) -> EnergyBreakdown {
    let kinetic = 0.5 * grid.l2_norm_sq(u2);
    let gradient = gradient_energy(grid, u1);
    let n = u1.len();
    let potential = grid.dx()
        * ((1..n - 1).map(|i| 1.0 - u1[i].cos()).sum::<f64>()
            + 0.5 * ((1.0 - u1[0].cos()) + (1.0 - u1[n - 1].cos())));
    let delta_term = impurity.energy(grid, u1);
    EnergyBreakdown::new(kinetic, gradient, potential, delta_term)
}

pub(crate) fn gradient_energy(grid: &Grid1D, u1: &[f64]) -> f64 {
    let s: f64 = u1.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    0.5 * s / grid.dx()
}

/// Static energy `E(u, 0)` for a profile.
pub fn static_energy(grid: &Grid1D, u1: &[f64], impurity: &DiscreteImpurity) -> f64 {
    let n = u1.len();
    let potential = grid.dx()
        * ((1..n - 1).map(|i| 1.0 - u1[i].cos()).sum::<f64>()
            + 0.5 * ((1.0 - u1[0].cos()) + (1.0 - u1[n - 1].cos())));
    gradient_energy(grid, u1) + potential + impurity.energy(grid, u1)
}

/// `H^1 x L^2` size of a difference of two states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationNorm {
    pub h1_part: f64,
    pub l2_part: f64,
    pub total: f64,
}

/// `||(u1 - v1, u2 - v2)||_{H^1 x L^2}` with trapezoid quadrature and
/// centered differences.
pub fn deviation_norm(state: &FieldState, reference: &FieldState) -> Result<DeviationNorm> {
    state.grid().check_same(reference.grid())?;
    let d1: Vec<f64> = state
        .u1
        .iter()
        .zip(&reference.u1)
        .map(|(a, b)| a - b)
        .collect();
    let d2: Vec<f64> = state
        .u2
        .iter()
        .zip(&reference.u2)
        .map(|(a, b)| a - b)
        .collect();
    Ok(pair_norm(state.grid(), &d1, &d2))
}

/// Norm of an explicit difference pair `(v1, v2)`.
pub fn pair_norm(grid: &Grid1D, v1: &[f64], v2: &[f64]) -> DeviationNorm {
    let h1_part = h1_norm(grid, v1);
    let l2_part = grid.l2_norm(v2);
    DeviationNorm {
        h1_part,
        l2_part,
        total: h1_part + l2_part,
    }
}

pub fn h1_norm(grid: &Grid1D, v: &[f64]) -> f64 {
    let dv = grid.gradient(v);
    (grid.l2_norm_sq(v) + grid.l2_norm_sq(&dv)).sqrt()
}

/// The `H^1_sin` seminorm pair `(||u_x||_2, ||sin(u/2)||_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineSeminorms {
    pub gradient_l2: f64,
    pub half_sine_l2: f64,
}

pub fn sine_seminorms(grid: &Grid1D, u1: &[f64]) -> SineSeminorms {
    let du = grid.gradient(u1);
    let half: Vec<f64> = u1.iter().map(|u| (0.5 * u).sin()).collect();
    SineSeminorms {
        gradient_l2: grid.l2_norm(&du),
        half_sine_l2: grid.l2_norm(&half),
    }
}

/// `||sin u1||_2 + ||u2||_2 + ||u1_x||_2`, the quantity kept uniformly
/// bounded by the energy.
pub fn uniform_bound_norm(state: &FieldState) -> f64 {
    let g = state.grid();
    let s: Vec<f64> = state.u1.iter().map(|u| u.sin()).collect();
    g.l2_norm(&s) + g.l2_norm(&state.u2) + g.l2_norm(&g.gradient(&state.u1))
}

/// One evaluation of `2 ||f||_inf^2 <= a ||f||_2^2 + ||f_x||_2^2 / a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GagliardoCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub holds: bool,
}

/// Discrete Gagliardo–Nirenberg check with slack `10 dx ||f||_{H^1}^2`.
pub fn gagliardo_check(grid: &Grid1D, f: &[f64], a: f64) -> GagliardoCheck {
    let sup = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let l2 = grid.l2_norm_sq(f);
    let grad = grid.l2_norm_sq(&grid.gradient(f));
    let lhs = 2.0 * sup * sup;
    let rhs = a * l2 + grad / a;
    let tol = 10.0 * grid.dx() * (l2 + grad);
    GagliardoCheck {
        lhs,
        rhs,
        tol,
        holds: lhs <= rhs + tol,
    }
}
