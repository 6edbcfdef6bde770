//! Linear Klein–Gordon propagator `u_tt - u_xx + u = 0` by direct
//! quadrature of the fundamental solution `G = 1/2 θ(t - |x|) J0(sqrt(t² - x²))`.
//!
//! With `A[f] = ∂_t G * f` and `B[f] = G * f`,
//! `u(t) = A[u0] + B[u1]` and `u_t(t) = B[u0'' - u0] + A[u1]`.
//! Substituting `s = t sin φ` removes the endpoint square-root behaviour:
//!
//! * `B[f](x) = 1/2 ∫ J0(t cos φ) f(x - t sin φ) t cos φ dφ`
//! * `A[f](x) = 1/2 (f(x+t) + f(x-t)) - 1/2 ∫ t J1(t cos φ) f(x - t sin φ) dφ`
//!
//! over `φ ∈ [-π/2, π/2]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{FieldState, Grid1D};

/// Bessel function of the first kind of integer order from its integral
/// representation `1/π ∫_0^π cos(nθ - r sin θ) dθ`, evaluated with the
/// trapezoid rule (spectrally accurate for this periodic integrand).
pub fn bessel_jn(n: u32, r: f64) -> f64 {
    let m = 64 + 2 * r.abs().ceil() as usize;
    let h = PI / m as f64;
    let nf = n as f64;
    let f = |th: f64| (nf * th - r * th.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for k in 1..m {
        s += f(k as f64 * h);
    }
    s * h / PI
}

pub fn bessel_j0(r: f64) -> f64 {
    bessel_jn(0, r)
}

pub fn bessel_j1(r: f64) -> f64 {
    bessel_jn(1, r)
}

/// Four-point Lagrange interpolation of grid samples, zero outside `[-L, L]`.
fn interpolate(grid: &Grid1D, values: &[f64], x: f64) -> f64 {
    let l = grid.half_width();
    if x < -l || x > l {
        return 0.0;
    }
    let h = grid.dx();
    let n = values.len();
    let pos = (x + l) / h;
    let i = (pos.floor() as isize).clamp(1, n as isize - 3) as usize;
    let s = pos - i as f64;
    let (a, b, c, d) = (values[i - 1], values[i], values[i + 1], values[i + 2]);
    // nodes at s = -1, 0, 1, 2
    -a * s * (s - 1.0) * (s - 2.0) / 6.0 + b * (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0
        - c * (s + 1.0) * s * (s - 2.0) / 2.0
        + d * (s + 1.0) * s * (s - 1.0) / 6.0
}

const PANELS: usize = 400;

/// Composite Simpson rule over `φ ∈ [-π/2, π/2]`.
#[cfg(test)]
fn simpson_phi(f: impl Fn(f64) -> f64) -> f64 {
    let a = -0.5 * PI;
    let h = PI / (2 * PANELS) as f64;
    let mut s = f(a) + f(-a);
    for k in 1..2 * PANELS {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

struct Kernel {
    phis: Vec<f64>,
    weights: Vec<f64>,
    j0: Vec<f64>,
    j1: Vec<f64>,
    t: f64,
}

impl Kernel {
    fn new(t: f64) -> Self {
        let a = -0.5 * PI;
        let h = PI / (2 * PANELS) as f64;
        let mut phis = Vec::with_capacity(2 * PANELS + 1);
        let mut weights = Vec::with_capacity(2 * PANELS + 1);
        for k in 0..=2 * PANELS {
            let w = if k == 0 || k == 2 * PANELS {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            phis.push(a + k as f64 * h);
            weights.push(w * h / 3.0);
        }
        let j0 = phis.iter().map(|p| bessel_j0(t * p.cos())).collect();
        let j1 = phis.iter().map(|p| bessel_j1(t * p.cos())).collect();
        Self {
            phis,
            weights,
            j0,
            j1,
            t,
        }
    }

    fn convolve_g(&self, grid: &Grid1D, f: &[f64], x: f64) -> f64 {
        let t = self.t;
        let mut s = 0.0;
        for k in 0..self.phis.len() {
            let p = self.phis[k];
            s += self.weights[k] * self.j0[k] * interpolate(grid, f, x - t * p.sin()) * t * p.cos();
        }
        0.5 * s
    }

    fn convolve_dt_g(&self, grid: &Grid1D, f: &[f64], x: f64) -> f64 {
        let t = self.t;
        let mut s = 0.0;
        for k in 0..self.phis.len() {
            let p = self.phis[k];
            s += self.weights[k] * t * self.j1[k] * interpolate(grid, f, x - t * p.sin());
        }
        0.5 * (interpolate(grid, f, x + t) + interpolate(grid, f, x - t)) - 0.5 * s
    }
}

/// Nodes `[first, last]` where `|v| > 1e-14 max|v|` for either component.
fn support(grid: &Grid1D, a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let cut = 1e-14 * scale;
    let live = |i: usize| a[i].abs() > cut || b[i].abs() > cut;
    let first = (0..a.len()).find(|&i| live(i))?;
    let last = (0..a.len()).rev().find(|&i| live(i))?;
    Some((grid.x(first), grid.x(last)))
}

/// Linear Klein–Gordon solution at time `t >= 0` from the datum in `initial`.
pub fn linear_kg_reference(initial: &FieldState, t: f64) -> Result<FieldState> {
    let grid = initial.grid();
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("reference time {t}")));
    }
    let Some((lo, hi)) = support(grid, &initial.u1, &initial.u2) else {
        return Ok(FieldState::zeros(grid).with_time(initial.time + t));
    };
    let l = grid.half_width();
    if lo - t < -l || hi + t > l {
        return Err(Error::LightCone(format!(
            "support [{lo}, {hi}] widened by t = {t} leaves [-{l}, {l}]"
        )));
    }
    if t == 0.0 {
        return Ok(initial.clone());
    }
    let u0 = &initial.u1;
    let u1 = &initial.u2;
    let n = grid.len();
    let inv_h2 = 1.0 / (grid.dx() * grid.dx());
    let mut src = vec![0.0; n];
    for i in 1..n - 1 {
        src[i] = (u0[i + 1] - 2.0 * u0[i] + u0[i - 1]) * inv_h2 - u0[i];
    }
    let ker = Kernel::new(t);
    let zero_u0 = u0.iter().all(|&v| v == 0.0);
    let mut out1 = vec![0.0; n];
    let mut out2 = vec![0.0; n];
    for i in 0..n {
        let x = grid.x(i);
        // Outside the light cone both terms vanish identically.
        if x < lo - t - grid.dx() || x > hi + t + grid.dx() {
            continue;
        }
        out1[i] = ker.convolve_g(grid, u1, x);
        out2[i] = ker.convolve_dt_g(grid, u1, x);
        if !zero_u0 {
            out1[i] += ker.convolve_dt_g(grid, u0, x);
            out2[i] += ker.convolve_g(grid, &src, x);
        }
    }
    FieldState::new(grid.clone(), out1, out2, initial.time + t)
}

/// Leapfrog for the linear equation `u_tt = u_xx - u`, identical in
/// structure to the nonlinear stepper (clamped ends, kick-drift-kick).
pub struct LinearStepper {
    grid: Grid1D,
    acc: Vec<f64>,
}

impl LinearStepper {
    pub fn new(grid: &Grid1D) -> Self {
        Self {
            grid: grid.clone(),
            acc: vec![0.0; grid.len()],
        }
    }

    fn compute_acc(&mut self, u: &[f64]) {
        let n = u.len();
        let inv_h2 = 1.0 / (self.grid.dx() * self.grid.dx());
        for i in 1..n - 1 {
            self.acc[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2 - u[i];
        }
    }

    pub fn evolve(&mut self, initial: &FieldState, horizon: f64, dt: f64) -> Result<FieldState> {
        let (steps, dt) = super::step_plan(horizon, dt)?;
        super::check_cfl(&self.grid, dt)?;
        let mut s = initial.clone();
        let n = s.u1.len();
        self.compute_acc(&s.u1);
        for _ in 0..steps {
            for i in 1..n - 1 {
                s.u2[i] += 0.5 * dt * self.acc[i];
                s.u1[i] += dt * s.u2[i];
            }
            self.compute_acc(&s.u1);
            for i in 1..n - 1 {
                s.u2[i] += 0.5 * dt * self.acc[i];
            }
        }
        s.time = initial.time + horizon;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::mollifier::reference_bump;

    /// Power series of J_n, an oracle independent of the integral form.
    fn bessel_series(n: u32, r: f64) -> f64 {
        let mut term = (0.5 * r).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut s = term;
        for k in 1..80 {
            term *= -(0.25 * r * r) / (k as f64 * (k + n as usize) as f64);
            s += term;
        }
        s
    }

    #[test]
    fn bessel_matches_series() {
        for r in [0.0, 0.3, 1.0, 2.5, 7.0, 12.0] {
            assert!(
                (bessel_j0(r) - bessel_series(0, r)).abs() < 1e-12,
                "J0({r})"
            );
            assert!(
                (bessel_j1(r) - bessel_series(1, r)).abs() < 1e-12,
                "J1({r})"
            );
        }
        assert!((bessel_j0(2.404825557695773)).abs() < 1e-12);
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let g = Grid1D::new(2.0, 41).unwrap();
        let f = g.sample(|x| x * x * x - x + 0.5);
        for x in [-1.73, -0.01, 0.0, 0.55, 1.8] {
            let v = interpolate(&g, &f, x);
            assert!((v - (x * x * x - x + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_datum_gives_zero() {
        let g = Grid1D::new(10.0, 201).unwrap();
        let s = linear_kg_reference(&FieldState::zeros(&g), 1.0).unwrap();
        assert!(s.u1.iter().chain(&s.u2).all(|&v| v == 0.0));
    }

    #[test]
    fn causality() {
        let g = Grid1D::new(10.0, 1001).unwrap();
        let mut s = FieldState::zeros(&g);
        s.u2 = g.sample(reference_bump);
        s.u1 = g.sample(|x| 0.5 * reference_bump(x));
        let out = linear_kg_reference(&s, 2.0).unwrap();
        for i in 0..g.len() {
            if g.x(i).abs() > 3.0 + 2.0 * g.dx() {
                assert_eq!(out.u1[i], 0.0);
                assert_eq!(out.u2[i], 0.0);
            }
        }
        assert!(out.u1[g.zero_index()].abs() > 1e-3);
    }

    #[test]
    fn light_cone_exit_is_rejected() {
        let g = Grid1D::new(5.0, 501).unwrap();
        let mut s = FieldState::zeros(&g);
        s.u2 = g.sample(|x| reference_bump(x - 3.0));
        assert!(matches!(
            linear_kg_reference(&s, 2.0),
            Err(Error::LightCone(_))
        ));
    }

    #[test]
    fn plane_wave_consistency() {
        // Spatially constant velocity datum: u = sin t exactly (inside the cone).
        // B[1] = 1/2 ∫_{-t}^{t} J0(sqrt(t²-s²)) ds = sin t.
        let v = simpson_phi(|p| 0.5 * bessel_j0(1.3 * p.cos()) * 1.3 * p.cos());
        assert!((v - 1.3f64.sin()).abs() < 1e-10);
        // A[1] = cos t.
        let a = 1.0 - simpson_phi(|p| 0.5 * 1.3 * bessel_j1(1.3 * p.cos()));
        assert!((a - 1.3f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn agrees_with_linear_stepper_at_fine_resolution() {
        let g = Grid1D::new(10.0, 4001).unwrap();
        let mut s = FieldState::zeros(&g);
        s.u2 = g.sample(|x| (-x * x).exp());
        s.u1 = g.sample(|x| 0.3 * (-(x - 0.5).powi(2)).exp());
        let r = linear_kg_reference(&s, 1.0).unwrap();
        let fd = LinearStepper::new(&g)
            .evolve(&s, 1.0, 0.5 * g.dx())
            .unwrap();
        for i in 0..g.len() {
            assert!((r.u1[i] - fd.u1[i]).abs() < 1e-5, "u1 at {}", g.x(i));
            assert!((r.u2[i] - fd.u2[i]).abs() < 1e-4, "u2 at {}", g.x(i));
        }
    }
}
