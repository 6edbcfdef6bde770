//! Closed-form stationary and traveling waves, the matching algebra at the
//! impurity, and the existence rule for pinned ground states.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FieldState, Grid1D};

/// Positive root `y = e^{-x0}` of `-2/q = (1 - y^2)/(1 + y^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingRoot {
    pub q: f64,
    pub y: f64,
    pub exists: bool,
}

/// Closed-form solution of the matching equation. When `|q| <= 2` there is
/// no root and `y` is reported as NaN.
pub fn matching_root(q: f64) -> Result<MatchingRoot> {
    if q == 0.0 {
        return Err(Error::UndefinedCoupling);
    }
    if !q.is_finite() {
        return Err(Error::InvalidParameter(format!("coupling q = {q}")));
    }
    let exists = q.abs() > 2.0;
    let y = if exists {
        ((q + 2.0) / (q - 2.0)).sqrt()
    } else {
        f64::NAN
    };
    Ok(MatchingRoot { q, y, exists })
}

/// Bisection on the matching equation in the variable `s = y/(1+y)`.
/// Returns `None` when the left side never crosses `-2/q`.
pub fn matching_root_bisection(q: f64) -> Option<f64> {
    let target = -2.0 / q;
    // (1 - y^2)/(1 + y^2) decreases from 1 (y = 0) to -1 (y -> inf).
    let f = |s: f64| {
        let y = s / (1.0 - s);
        (1.0 - y * y) / (1.0 + y * y) - target
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64 - 1e-15);
    if f(lo) * f(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    Some(s / (1.0 - s))
}

/// The closed-form waves this crate can sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveKind {
    Kink { center: f64 },
    GroundState { q: f64 },
    BoostedKink { speed: f64, center: f64 },
}

impl WaveKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WaveKind::Kink { center } if !center.is_finite() => {
                Err(Error::InvalidParameter(format!("kink center {center}")))
            }
            WaveKind::GroundState { q } => matching_root(q).and_then(|r| {
                if r.exists {
                    Ok(())
                } else {
                    Err(Error::NoH1Wave { q_abs: q.abs() })
                }
            }),
            WaveKind::BoostedKink { speed, .. } if !(speed.abs() < 1.0) => {
                Err(Error::Superluminal(speed.abs()))
            }
            _ => Ok(()),
        }
    }

    /// Samples the wave at time `t` (static waves ignore `t`).
    pub fn state(&self, grid: &Grid1D, t: f64) -> Result<FieldState> {
        match *self {
            WaveKind::Kink { center } => kink_profile(grid, center),
            WaveKind::GroundState { q } => ground_state(grid, q),
            WaveKind::BoostedKink { speed, center } => boosted_kink_state(grid, speed, center, t),
        }
    }

    /// `[u_x(0+) - u_x(0-)] - q sin u(0)` from exact derivatives.
    pub fn gluing_residual_exact(&self, q: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            // Smooth profiles: no slope jump at the origin.
            WaveKind::Kink { center } => -q * kink_value(-center).sin(),
            WaveKind::BoostedKink { speed, center } => {
                let gamma = 1.0 / (1.0 - speed * speed).sqrt();
                -q * kink_value(gamma * (-center)).sin()
            }
            WaveKind::GroundState { q: q0 } => {
                let y = matching_root(q0)?.y;
                let slope = 4.0 * y / (1.0 + y * y);
                // u_x(0+) = -slope, u_x(0-) = +slope.
                -2.0 * slope - q * (4.0 * y.atan()).sin()
            }
        })
    }
}

#[inline]
fn kink_value(xi: f64) -> f64 {
    4.0 * xi.exp().atan()
}

/// Static kink `4 arctan e^{x - x0}` with zero velocity.
pub fn kink_profile(grid: &Grid1D, center: f64) -> Result<FieldState> {
    if !center.is_finite() {
        return Err(Error::InvalidParameter(format!("kink center {center}")));
    }
    FieldState::from_profile(grid.clone(), grid.sample(|x| kink_value(x - center)))
}

/// Exact Lorentz-boosted kink and its time derivative at time `t`.
pub fn boosted_kink_state(grid: &Grid1D, speed: f64, center: f64, t: f64) -> Result<FieldState> {
    if !(speed.abs() < 1.0) {
        return Err(Error::Superluminal(speed.abs()));
    }
    let gamma = 1.0 / (1.0 - speed * speed).sqrt();
    let xi = |x: f64| gamma * (x - speed * t - center);
    let u1 = grid.sample(|x| kink_value(xi(x)));
    let u2 = grid.sample(|x| -gamma * speed * 2.0 / xi(x).cosh());
    FieldState::new(grid.clone(), u1, u2, t)
}

/// Even positive pinned wave `4 arctan(y e^{-|x|})`, `y = sqrt((q+2)/(q-2))`.
pub fn ground_state(grid: &Grid1D, q: f64) -> Result<FieldState> {
    let root = matching_root(q)?;
    if !root.exists {
        return Err(Error::NoH1Wave { q_abs: q.abs() });
    }
    let y = root.y;
    let n = grid.len();
    let z = grid.zero_index();
    let mut u1 = vec![0.0; n];
    for i in z..n {
        u1[i] = 4.0 * (y * (-grid.x(i)).exp()).atan();
    }
    for i in 0..z {
        u1[i] = u1[n - 1 - i];
    }
    FieldState::from_profile(grid.clone(), u1)
}

/// Interface residual from sampled data: second-order one-sided slopes at
/// the origin node.
pub fn gluing_residual(profile: &FieldState, q: f64) -> f64 {
    let (left, right) = profile.grid().one_sided_at_zero(&profile.u1);
    (right - left) - q * profile.u1_at_zero().sin()
}

/// `u -> -u`.
pub fn negate(state: &FieldState) -> FieldState {
    let mut s = state.clone();
    s.u1.iter_mut()
        .chain(s.u2.iter_mut())
        .for_each(|v| *v = -*v);
    s
}

/// `u -> u + 2 pi k`.
pub fn shift_by_2pi(state: &FieldState, k: i32) -> FieldState {
    let mut s = state.clone();
    let c = 2.0 * PI * k as f64;
    s.u1.iter_mut().for_each(|v| *v += c);
    s
}

/// Bogomolny value of `int 1/2 u_x^2 + 1 - cos u` for the kink.
pub const KINK_BULK_ENERGY: f64 = 8.0;

/// Static energy of the centered kink: `8 + 2q`.
pub fn kink_energy(q: f64) -> f64 {
    KINK_BULK_ENERGY + 2.0 * q
}

/// Static energy of the ground state from the half-line Bogomolny identity:
/// each half contributes `int_0^{Q(0)} 2 sin(u/2) du = 4 (1 - cos(Q(0)/2))`.
pub fn ground_state_energy(q: f64) -> Result<f64> {
    let root = matching_root(q)?;
    if !root.exists {
        return Err(Error::NoH1Wave { q_abs: q.abs() });
    }
    let peak = 4.0 * root.y.atan();
    Ok(8.0 * (1.0 - (0.5 * peak).cos()) + q * (1.0 - peak.cos()))
}

/// Position of the first crossing of the level `u1 = pi`, linearly interpolated.
/// `None` if the field never crosses the level.
pub fn kink_center(state: &FieldState) -> Option<f64> {
    let g = state.grid();
    let u = &state.u1;
    let level = PI;
    for i in 0..u.len() - 1 {
        let (a, b) = (u[i] - level, u[i + 1] - level);
        if a == 0.0 {
            return Some(g.x(i));
        }
        if a * b < 0.0 {
            let s = a / (a - b);
            return Some(g.x(i) + s * g.dx());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy;
    use crate::impurity::ImpurityParams;

    fn grid() -> Grid1D {
        Grid1D::new(20.0, 4001).unwrap()
    }

    #[test]
    fn kink_values() {
        let g = grid();
        let k = kink_profile(&g, 0.0).unwrap();
        assert!((k.u1_at_zero() - PI).abs() < 1e-15);
        let i10 = g.zero_index() + 1000;
        assert!((k.u1[i10] - 6.283003).abs() < 1e-5);
        assert!((k.u1[i10] - (2.0 * PI - 4.0 * (-10f64).exp())).abs() < 1e-8);
        assert!(k.u1.windows(2).all(|w| w[1] > w[0]));
        let k1 = kink_profile(&g, 1.0).unwrap();
        assert!((k1.u1[g.zero_index() + 100] - PI).abs() < 1e-14);
        assert!(k.u2.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn boosted_kink() {
        let g = grid();
        let still = boosted_kink_state(&g, 0.0, 0.0, 3.0).unwrap();
        let k = kink_profile(&g, 0.0).unwrap();
        assert_eq!(still.u1, k.u1);
        assert!(still.u2.iter().all(|&v| v == 0.0));
        let b = boosted_kink_state(&g, 0.6, 0.0, 0.0).unwrap();
        let z = g.zero_index();
        assert!((b.u1[z] - PI).abs() < 1e-15);
        assert!((b.u2[z] + 1.5).abs() < 1e-14);
        assert!(matches!(
            boosted_kink_state(&g, 1.0, 0.0, 0.0),
            Err(Error::Superluminal(_))
        ));
    }

    #[test]
    fn boosted_kink_velocity_is_time_derivative() {
        let g = Grid1D::new(10.0, 201).unwrap();
        let (v, t, h) = (0.45, 0.7, 1e-5);
        let s = boosted_kink_state(&g, v, -1.0, t).unwrap();
        let p = boosted_kink_state(&g, v, -1.0, t + h).unwrap();
        let m = boosted_kink_state(&g, v, -1.0, t - h).unwrap();
        for i in 0..g.len() {
            let fd = (p.u1[i] - m.u1[i]) / (2.0 * h);
            assert!((fd - s.u2[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn matching_roots() {
        let r = matching_root(-4.0).unwrap();
        assert!(r.exists && (r.y - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let r = matching_root(6.0).unwrap();
        assert!((r.y - 2f64.sqrt()).abs() < 1e-15);
        assert!(!matching_root(2.0).unwrap().exists);
        assert!(!matching_root(-1.0).unwrap().exists);
        assert_eq!(matching_root(0.0), Err(Error::UndefinedCoupling));
        for q in [-10.0, -4.0, -3.0, -2.1, 2.1, 3.0, 4.0, 10.0] {
            let r = matching_root(q).unwrap();
            let lhs = -2.0 / q;
            let rhs = (1.0 - r.y * r.y) / (1.0 + r.y * r.y);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
            let b = matching_root_bisection(q).unwrap();
            assert!((b - r.y).abs() < 1e-10, "q = {q}: {b} vs {}", r.y);
        }
        assert!(matching_root_bisection(1.5).is_none());
    }

    #[test]
    fn ground_state_values() {
        let g = grid();
        let q4 = ground_state(&g, -4.0).unwrap();
        assert!((q4.u1_at_zero() - 2.0 * PI / 3.0).abs() < 1e-14);
        assert!((q4.u1_at_zero() - 2.09440).abs() < 1e-5);
        let q6 = ground_state(&g, 6.0).unwrap();
        assert!((q6.u1_at_zero() - 3.821266).abs() < 1e-6);
        assert!(q6.u1[0] < 1e-6 && q6.u1[g.len() - 1] < 1e-6);
        for i in 0..g.len() {
            assert_eq!(q6.u1[i], q6.u1[g.len() - 1 - i]);
        }
        assert!(matches!(ground_state(&g, 1.0), Err(Error::NoH1Wave { .. })));
        assert!(matches!(
            ground_state(&g, -2.0),
            Err(Error::NoH1Wave { .. })
        ));
        assert_eq!(ground_state(&g, 0.0).unwrap_err(), Error::UndefinedCoupling);
    }

    #[test]
    fn gluing_residuals() {
        let g = grid();
        let gs = WaveKind::GroundState { q: -4.0 };
        assert!(gs.gluing_residual_exact(-4.0).unwrap().abs() < 1e-12);
        let k = WaveKind::Kink { center: 0.0 };
        assert!(k.gluing_residual_exact(3.0).unwrap().abs() < 1e-12);
        assert!(gluing_residual(&kink_profile(&g, 0.0).unwrap(), 3.0).abs() < 1e-6);
        // direct evaluation: -q sin(4 arctan e^{0.5}) for the kink centred at -0.5
        let oracle = 4.0 * (4.0 * 0.5f64.exp().atan()).sin();
        assert!((oracle + 3.278514).abs() < 1e-6);
        let shifted = WaveKind::Kink { center: -0.5 };
        assert!((shifted.gluing_residual_exact(-4.0).unwrap() - oracle).abs() < 1e-12);
        let fd = gluing_residual(&kink_profile(&g, -0.5).unwrap(), -4.0);
        assert!((fd - oracle).abs() < 1e-4);
        let other = WaveKind::Kink { center: 0.5 };
        assert!((other.gluing_residual_exact(-4.0).unwrap() + oracle).abs() < 1e-12);
    }

    #[test]
    fn ground_state_satisfies_interface_condition() {
        let g = grid();
        for q in [-10.0, -4.0, -3.0, -2.1, 2.1, 3.0, 4.0, 6.0, 10.0] {
            let exact = WaveKind::GroundState { q }
                .gluing_residual_exact(q)
                .unwrap();
            assert!(exact.abs() <= 1e-10, "q={q} exact {exact}");
            let fd = gluing_residual(&ground_state(&g, q).unwrap(), q);
            assert!(fd.abs() <= 5.0 * g.dx() * g.dx(), "q={q} fd {fd}");
        }
    }

    #[test]
    fn centered_kink_is_the_only_zero_of_the_residual() {
        for q in [-4.0, -1.0, 0.5, 3.0] {
            let xs: Vec<f64> = (0..=600).map(|i| -3.0 + 0.01 * i as f64 + 0.005).collect();
            let r: Vec<f64> = xs
                .iter()
                .map(|&c| {
                    WaveKind::Kink { center: c }
                        .gluing_residual_exact(q)
                        .unwrap()
                })
                .collect();
            let crossings: Vec<f64> = xs
                .windows(2)
                .zip(r.windows(2))
                .filter(|(_, w)| w[0] * w[1] < 0.0)
                .map(|(x, _)| 0.5 * (x[0] + x[1]))
                .collect();
            assert_eq!(crossings.len(), 1, "q = {q}");
            assert!(crossings[0].abs() < 0.01);
        }
    }

    #[test]
    fn closed_form_energies() {
        let g = Grid1D::new(20.0, 40001).unwrap();
        let k = kink_profile(&g, 0.0).unwrap();
        for q in [-1.0, 1.0] {
            let e = energy(&k, &ImpurityParams::sharp(q)).unwrap().total;
            assert!((e - kink_energy(q)).abs() < 1e-6, "q={q}: {e}");
        }
        let gs = ground_state(&g, -4.0).unwrap();
        let e = energy(&gs, &ImpurityParams::sharp(-4.0)).unwrap().total;
        assert!((ground_state_energy(-4.0).unwrap() + 2.0).abs() < 1e-14);
        assert!((e + 2.0).abs() < 1e-6, "{e}");
    }

    #[test]
    fn symmetry_operations() {
        let g = Grid1D::new(5.0, 51).unwrap();
        let q = ground_state(&g, 3.0).unwrap();
        let back = shift_by_2pi(&shift_by_2pi(&q, 1), -1);
        for (a, b) in back.u1.iter().zip(&q.u1) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(negate(&negate(&q)), q);
    }

    #[test]
    fn center_tracking() {
        let g = grid();
        let k = kink_profile(&g, 1.234).unwrap();
        assert!((kink_center(&k).unwrap() - 1.234).abs() < 1e-5);
        assert!(kink_center(&FieldState::zeros(&g)).is_none());
    }
}
