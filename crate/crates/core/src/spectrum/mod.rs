//! Linearization around a stationary wave `K`:
//!
//! ```text
//! L_K = -∂xx + cos K,   u_x(0+) - u_x(0-) = q cos(K(0)) u(0),
//! ```
//!
//! discretized on the interior nodes with Dirichlet ends. The interface
//! condition becomes the diagonal correction `Z/dx`, `Z = q cos K(0)`, at the
//! origin row, so the matrix stays symmetric tridiagonal. A negative
//! eigenvalue `λ1` of `L_K` gives the real growth rate `sqrt(-λ1)` of the
//! Hamiltonian linearization.

pub mod tridiag;

use serde::{Deserialize, Serialize};

pub use tridiag::SymTridiagonal;

use crate::error::{Error, Result};
use crate::grid::{FieldState, Grid1D};
use crate::waves::matching_root;

/// Discrete `L_K` on the interior nodes `1..N-1`.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    grid: Grid1D,
    background: Vec<f64>,
    q: f64,
    interface_coefficient: f64,
    matrix: SymTridiagonal,
    /// Separate copies of the two off-diagonals, kept so symmetry is an
    /// observable property rather than an assumption.
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearizedOperator {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `Z = q cos K(0)`.
    pub fn interface_coefficient(&self) -> f64 {
        self.interface_coefficient
    }

    pub fn background(&self) -> &[f64] {
        &self.background
    }

    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        self.lower == self.upper
    }

    /// `L_K v` on a full-grid vector; the ends of the result are zero and the
    /// ends of `v` are treated as the Dirichlet values zero.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let y = self.matrix.apply(&v[1..n - 1]);
        let mut out = vec![0.0; n];
        out[1..n - 1].copy_from_slice(&y);
        out
    }

    /// Size of the potential part, used to scale the zero tolerance.
    fn potential_scale(&self) -> f64 {
        self.background
            .iter()
            .fold(1.0f64, |m, k| m.max(k.cos().abs()))
    }

    /// `10 dx^2` times the potential scale.
    pub fn zero_tolerance(&self) -> f64 {
        10.0 * self.grid.dx().powi(2) * self.potential_scale()
    }
}

/// Builds `L_K` for the background profile `background.u1` and coupling `q`.
pub fn assemble_linearized(background: &FieldState, q: f64) -> Result<LinearizedOperator> {
    let grid = background.grid().clone();
    if !q.is_finite() {
        return Err(Error::InvalidParameter(format!("coupling q = {q}")));
    }
    background.check_finite()?;
    let n = grid.len();
    let h = grid.dx();
    let inv_h2 = 1.0 / (h * h);
    let k = &background.u1;
    let z = grid.zero_index();
    let interface_coefficient = q * k[z].cos();
    let mut diag: Vec<f64> = (1..n - 1).map(|i| 2.0 * inv_h2 + k[i].cos()).collect();
    diag[z - 1] += interface_coefficient / h;
    let lower = vec![-inv_h2; n.saturating_sub(3)];
    let upper = lower.clone();
    let matrix = SymTridiagonal::new(diag, upper.clone());
    Ok(LinearizedOperator {
        grid,
        background: k.clone(),
        q,
        interface_coefficient,
        matrix,
        lower,
        upper,
    })
}

/// Bottom of the spectrum of `L_K`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    /// Full-grid eigenvectors, normalized in discrete `L^2`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub morse_index: usize,
    pub has_zero_mode: bool,
    pub tol_zero: f64,
    /// Lowest eigenvalue of the first dense cluster (estimate of the
    /// essential-spectrum edge on the truncated domain).
    pub ess_edge_estimate: Option<f64>,
    pub growth_rate: f64,
    pub interface_coefficient: f64,
}

/// Lowest `count` eigenpairs of `op`, each with residual
/// `||A v - λ v||_2 <= tol` (discrete `L^2`, unit `v`).
pub fn eigen_bottom(op: &LinearizedOperator, count: usize, tol: f64) -> Result<SpectralReport> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "eigenpair count must be >= 1".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol}")));
    }
    let a = op.matrix();
    let m = a.len();
    let count = count.min(m);
    let grid = op.grid();
    let h = grid.dx();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut unit: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for j in 0..count {
        let lambda = a.eigenvalue(j);
        let mut v = a.eigenvector(lambda, &unit)?;
        // Rayleigh quotient refinement of the bisection value.
        let av = a.apply(&v);
        let rq: f64 = av.iter().zip(&v).map(|(x, y)| x * y).sum();
        let lambda = if (rq - lambda).abs() < 1e-6 * lambda.abs().max(1.0) {
            rq
        } else {
            lambda
        };
        let res = av
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - lambda * y).powi(2))
            .sum::<f64>()
            .sqrt();
        if !(res <= tol) {
            return Err(Error::NonConvergence(format!(
                "eigenpair {j} (lambda = {lambda}) has residual {res} > {tol}"
            )));
        }
        // Fix the sign: largest-magnitude entry positive.
        let big = v
            .iter()
            .cloned()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if big < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvalues.push(lambda);
        unit.push(v);
        residuals.push(res);
    }
    // Euclidean-unit -> discrete L2 unit (interior weights are all dx).
    let scale = 1.0 / h.sqrt();
    let eigenvectors = unit
        .iter()
        .map(|v| {
            let mut full = vec![0.0; grid.len()];
            for (i, x) in v.iter().enumerate() {
                full[i + 1] = x * scale;
            }
            full
        })
        .collect();
    let tol_zero = op.zero_tolerance();
    let morse_index = a.count_below(-tol_zero);
    let has_zero_mode = a.count_below(tol_zero) > morse_index;
    let growth = growth_rate_from(eigenvalues[0]);
    Ok(SpectralReport {
        eigenvalues,
        eigenvectors,
        residuals,
        morse_index,
        has_zero_mode,
        tol_zero,
        ess_edge_estimate: estimate_edge(a, count),
        growth_rate: growth,
        interface_coefficient: op.interface_coefficient(),
    })
}

/// First eigenvalue `λ_j` (searching past the requested bottom pairs) with
/// three more eigenvalues inside `[λ_j, λ_j + 0.1]`.
fn estimate_edge(a: &SymTridiagonal, start: usize) -> Option<f64> {
    let m = a.len();
    let upto = (start + 12).min(m);
    let lambdas: Vec<f64> = (0..upto).map(|j| a.eigenvalue(j)).collect();
    lambdas.windows(4).find(|w| w[3] - w[0] < 0.1).map(|w| w[0])
}

fn growth_rate_from(lambda1: f64) -> f64 {
    if lambda1 < 0.0 {
        (-lambda1).sqrt()
    } else {
        0.0
    }
}

/// `σ = sqrt(-λ1)` when `λ1 < 0`, else 0.
pub fn growth_rate(report: &SpectralReport) -> f64 {
    growth_rate_from(report.eigenvalues[0])
}

/// `Q_K(v, w) = ∫ v_x w_x + cos K v w dx + q cos K(0) v(0) w(0)`, with edge
/// differences for the gradient term and the trapezoid rule for the rest.
pub fn bilinear_form(v: &[f64], w: &[f64], background: &FieldState, q: f64) -> Result<f64> {
    let grid = background.grid();
    grid.check_len("v", v.len())?;
    grid.check_len("w", w.len())?;
    let h = grid.dx();
    let grad: f64 = (0..v.len() - 1)
        .map(|i| (v[i + 1] - v[i]) * (w[i + 1] - w[i]))
        .sum::<f64>()
        / h;
    let pot: Vec<f64> = (0..v.len())
        .map(|i| background.u1[i].cos() * v[i] * w[i])
        .collect();
    let z = grid.zero_index();
    Ok(grad + grid.integrate(&pot) + q * background.u1[z].cos() * v[z] * w[z])
}

/// Closed form used to exclude a zero mode on ground states:
/// `-2 (q - 2) sqrt(q^2 - 4) / q^2`.
pub fn interface_identity_closed_form(q: f64) -> Result<f64> {
    let root = matching_root(q)?;
    if !root.exists {
        return Err(Error::NoH1Wave { q_abs: q.abs() });
    }
    Ok(-2.0 * (q - 2.0) * (q * q - 4.0).sqrt() / (q * q))
}

/// `2 sin K(0) + q K_x(0-) cos K(0)` evaluated from exact ground-state
/// derivatives.
pub fn interface_identity_exact(q: f64) -> Result<f64> {
    let root = matching_root(q)?;
    if !root.exists {
        return Err(Error::NoH1Wave { q_abs: q.abs() });
    }
    let y = root.y;
    let k0 = 4.0 * y.atan();
    let slope_left = 4.0 * y / (1.0 + y * y);
    Ok(2.0 * k0.sin() + q * slope_left * k0.cos())
}

/// Same quantity from samples, with the second-order left-sided slope.
pub fn interface_identity_sampled(profile: &FieldState, q: f64) -> f64 {
    let (left, _) = profile.grid().one_sided_at_zero(&profile.u1);
    let k0 = profile.u1_at_zero();
    2.0 * k0.sin() + q * left * k0.cos()
}

/// Residual of the discrete static equation on interior nodes
/// `-(u_{i+1} - 2u_i + u_{i-1})/dx^2 + sin u_i + [i = 0] (q/dx) sin u_0`.
/// Entries at the two ends are zero.
pub fn static_residual(grid: &Grid1D, u: &[f64], q: f64) -> Vec<f64> {
    let n = u.len();
    let h = grid.dx();
    let inv_h2 = 1.0 / (h * h);
    let mut r = vec![0.0; n];
    for i in 1..n - 1 {
        r[i] = -(u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2 + u[i].sin();
    }
    let z = grid.zero_index();
    r[z] += q / h * u[z].sin();
    r
}

/// Newton iteration for the discrete stationary wave nearest `guess`, ends
/// held at their initial values. The Jacobian is the assembled `L_K`.
/// Stops when `max |residual| <= tol`.
pub fn discrete_stationary(
    guess: &FieldState,
    q: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FieldState> {
    let grid = guess.grid().clone();
    let n = grid.len();
    let mut cur = FieldState::from_profile(grid.clone(), guess.u1.clone())?;
    for _ in 0..=max_iter {
        let r = static_residual(&grid, &cur.u1, q);
        let worst = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !worst.is_finite() {
            break;
        }
        if worst <= tol {
            return Ok(cur);
        }
        let op = assemble_linearized(&cur, q)?;
        let step = op.matrix().solve_shifted(0.0, &r[1..n - 1]);
        for (i, d) in step.iter().enumerate() {
            cur.u1[i + 1] -= d;
        }
    }
    Err(Error::NonConvergence(format!(
        "Newton iteration for the stationary wave did not reach {tol} in {max_iter} steps"
    )))
}
