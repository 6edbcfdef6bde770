//! Nonlinear stability and instability trials around stationary waves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{linear_fit, TrialConfig, ESCAPE_THRESHOLD, STABILITY_CONSTANT};
use crate::dynamics::{relative_drift, step_plan, Integrator};
use crate::energy::{deviation_norm, h1_norm, pair_norm};
use crate::error::{Error, Result};
use crate::grid::FieldState;
use crate::impurity::ImpurityParams;
use crate::spectrum::{assemble_linearized, discrete_stationary, eigen_bottom};
use crate::waves::WaveKind;

/// Largest wavenumber present in the random part of a perturbation.
const NOISE_BAND: f64 = 2.0;
/// Weight of each random component relative to the eigenvector.
const NOISE_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub amplitude: f64,
    pub initial_deviation: f64,
    pub sup_deviation: f64,
    /// `sup_deviation / amplitude`; 0 for a zero amplitude.
    pub ratio: f64,
    pub escape_time: Option<f64>,
    pub energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub wave: WaveKind,
    pub q: f64,
    pub horizon: f64,
    pub seed: u64,
    pub dt: f64,
    pub dx: f64,
    pub rows: Vec<AmplitudeRow>,
    pub stability_constant: f64,
    pub verdict: StabilityVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstabilityReport {
    pub wave: WaveKind,
    pub q: f64,
    pub seed_amplitude: f64,
    pub horizon: f64,
    pub lambda1: f64,
    pub predicted_rate: f64,
    pub fitted_rate: Option<f64>,
    pub relative_mismatch: Option<f64>,
    /// `[t_start, t_end]` of the samples used in the fit.
    pub fit_window: Option<(f64, f64)>,
    pub escape_time: Option<f64>,
    pub times: Vec<f64>,
    pub deviations: Vec<f64>,
}

impl InstabilityReport {
    /// True for a zero seed, which produces no motion and no fit.
    pub fn is_degenerate(&self) -> bool {
        self.seed_amplitude == 0.0
    }
}

fn static_wave(wave: &WaveKind, cfg: &TrialConfig) -> Result<FieldState> {
    wave.validate()?;
    match wave {
        WaveKind::BoostedKink { .. } => Err(Error::InvalidParameter(
            "trials need a static wave (kink or ground state)".into(),
        )),
        _ => wave.state(&cfg.grid, 0.0),
    }
}

/// The discrete stationary wave closest to the sampled one, or the sample
/// itself when the Newton polish does not converge nearby.
fn reference_wave(sampled: &FieldState, q: f64) -> FieldState {
    match discrete_stationary(sampled, q, 1e-10, 30) {
        Ok(w) => {
            let d: Vec<f64> = w.u1.iter().zip(&sampled.u1).map(|(a, b)| a - b).collect();
            if h1_norm(sampled.grid(), &d) < 1e-2 {
                w
            } else {
                sampled.clone()
            }
        }
        Err(_) => sampled.clone(),
    }
}

fn band_limited(rng: &mut ChaCha8Rng, grid: &crate::grid::Grid1D) -> Vec<f64> {
    let l = grid.half_width();
    let modes = (NOISE_BAND * 2.0 * l / std::f64::consts::PI)
        .floor()
        .max(1.0) as usize;
    let coef: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut v = grid.sample(|x| {
        let s = std::f64::consts::PI * (x + l) / (2.0 * l);
        coef.iter()
            .enumerate()
            .map(|(j, c)| c * ((j + 1) as f64 * s).sin())
            .sum()
    });
    let n = v.len();
    v[0] = 0.0;
    v[n - 1] = 0.0;
    v
}

/// Unit (`H^1 x L^2`) perturbation: the bottom eigenvector of `L_K` plus
/// fixed-seed band-limited noise in both components.
pub fn perturbation_direction(
    reference: &FieldState,
    q: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = reference.grid();
    let op = assemble_linearized(reference, q)?;
    let phi = eigen_bottom(&op, 1, 1e-6)?.eigenvectors.remove(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = band_limited(&mut rng, grid);
    let n2 = band_limited(&mut rng, grid);
    let (a, b, c) = (h1_norm(grid, &phi), h1_norm(grid, &n1), grid.l2_norm(&n2));
    let mut d1: Vec<f64> = phi
        .iter()
        .zip(&n1)
        .map(|(p, r)| p / a + NOISE_WEIGHT * r / b)
        .collect();
    let mut d2: Vec<f64> = n2.iter().map(|r| NOISE_WEIGHT * r / c).collect();
    let total = pair_norm(grid, &d1, &d2).total;
    d1.iter_mut().for_each(|v| *v /= total);
    d2.iter_mut().for_each(|v| *v /= total);
    Ok((d1, d2))
}

fn perturbed(reference: &FieldState, d1: &[f64], d2: &[f64], eps: f64) -> Result<FieldState> {
    let u1 = reference
        .u1
        .iter()
        .zip(d1)
        .map(|(a, b)| a + eps * b)
        .collect();
    let u2 = reference
        .u2
        .iter()
        .zip(d2)
        .map(|(a, b)| a + eps * b)
        .collect();
    FieldState::new(reference.grid().clone(), u1, u2, 0.0)
}

/// Runs the sharp-δ dynamics from `initial` and samples the deviation from
/// `reference`. Stops early at the escape threshold.
fn track(
    initial: &FieldState,
    reference: &FieldState,
    q: f64,
    horizon: f64,
    cfg: &TrialConfig,
    mut stop: impl FnMut(f64, f64) -> bool,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let (steps, dt) = step_plan(horizon, cfg.dt)?;
    let stride = cfg.stride();
    let mut integ = Integrator::new(&cfg.grid, &ImpurityParams::sharp(q))?;
    let mut cur = initial.clone();
    let d0 = deviation_norm(&cur, reference)?.total;
    let mut times = vec![0.0];
    let mut devs = vec![d0];
    let mut energies = vec![integ.energy(&cur)];
    let mut done = 0;
    let mut halted = stop(0.0, d0);
    while done < steps && !halted {
        let chunk = stride.min(steps - done);
        integ.advance(&mut cur, dt, chunk)?;
        done += chunk;
        let d = deviation_norm(&cur, reference)?.total;
        times.push(cur.time);
        devs.push(d);
        energies.push(integ.energy(&cur));
        halted = stop(cur.time, d);
    }
    Ok((times, devs, relative_drift(&energies)))
}

/// Measures `sup_t ||(u1 - K, u2)(t)||` for perturbations of each amplitude.
pub fn stability_trial(
    wave: WaveKind,
    q: f64,
    amplitudes: &[f64],
    horizon: f64,
    cfg: &TrialConfig,
) -> Result<StabilityReport> {
    cfg.validate()?;
    if amplitudes.is_empty() {
        return Err(Error::InvalidParameter("no amplitudes given".into()));
    }
    if amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0))
        || amplitudes.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidParameter(
            "amplitudes must be non-negative and strictly increasing".into(),
        ));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon {horizon}")));
    }
    let reference = reference_wave(&static_wave(&wave, cfg)?, q);
    let (d1, d2) = perturbation_direction(&reference, q, cfg.seed)?;
    let rows = amplitudes
        .par_iter()
        .map(|&eps| -> Result<AmplitudeRow> {
            let init = perturbed(&reference, &d1, &d2, eps)?;
            let mut escape = None;
            let (_, devs, drift) = track(&init, &reference, q, horizon, cfg, |t, d| {
                if d >= ESCAPE_THRESHOLD && escape.is_none() {
                    escape = Some(t);
                }
                escape.is_some()
            })?;
            let sup = devs.iter().cloned().fold(0.0, f64::max);
            let ratio = if eps > 0.0 { sup / eps } else { 0.0 };
            Ok(AmplitudeRow {
                amplitude: eps,
                initial_deviation: devs[0],
                sup_deviation: sup,
                ratio,
                escape_time: escape,
                energy_drift: drift,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stable = rows
        .iter()
        .all(|r| r.escape_time.is_none() && r.ratio <= STABILITY_CONSTANT);
    Ok(StabilityReport {
        wave,
        q,
        horizon,
        seed: cfg.seed,
        dt: cfg.dt,
        dx: cfg.grid.dx(),
        rows,
        stability_constant: STABILITY_CONSTANT,
        verdict: if stable {
            StabilityVerdict::Stable
        } else {
            StabilityVerdict::Unstable
        },
    })
}

/// Seeds the growth mode `(φ, σ φ)` of the linearization with deviation
/// `seed_amplitude` and fits the exponential rate while the deviation stays
/// below ten times the seed. When `L_K` has no negative eigenvalue the seed
/// is `(φ, 0)` along the bottom eigenvector.
pub fn instability_trial(
    wave: WaveKind,
    q: f64,
    seed_amplitude: f64,
    horizon: f64,
    cfg: &TrialConfig,
) -> Result<InstabilityReport> {
    cfg.validate()?;
    if !(seed_amplitude.is_finite() && seed_amplitude >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "seed amplitude {seed_amplitude}"
        )));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon {horizon}")));
    }
    let reference = reference_wave(&static_wave(&wave, cfg)?, q);
    let spec = eigen_bottom(&assemble_linearized(&reference, q)?, 1, 1e-6)?;
    let lambda1 = spec.eigenvalues[0];
    let sigma = spec.growth_rate;
    let mut report = InstabilityReport {
        wave,
        q,
        seed_amplitude,
        horizon,
        lambda1,
        predicted_rate: sigma,
        fitted_rate: None,
        relative_mismatch: None,
        fit_window: None,
        escape_time: None,
        times: vec![0.0],
        deviations: vec![0.0],
    };
    if seed_amplitude == 0.0 {
        return Ok(report);
    }
    let grid = &cfg.grid;
    let phi = &spec.eigenvectors[0];
    let d2: Vec<f64> = phi.iter().map(|p| sigma * p).collect();
    let scale = pair_norm(grid, phi, &d2).total;
    let d1: Vec<f64> = phi.iter().map(|p| p / scale).collect();
    let d2: Vec<f64> = d2.iter().map(|p| p / scale).collect();
    let init = perturbed(&reference, &d1, &d2, seed_amplitude)?;
    let mut escape = None;
    let (times, devs, _) = track(&init, &reference, q, horizon, cfg, |t, d| {
        if d >= ESCAPE_THRESHOLD && escape.is_none() {
            escape = Some(t);
        }
        escape.is_some()
    })?;
    report.escape_time = escape;
    let limit = 10.0 * seed_amplitude;
    let end = devs.iter().position(|&d| d >= limit);
    report.times = times;
    report.deviations = devs;
    let Some(end) = end else {
        return Err(Error::NoGrowth(format!(
            "deviation stayed below {limit:e} up to t = {} (lambda1 = {lambda1})",
            report.times.last().copied().unwrap_or(0.0)
        )));
    };
    let ts = &report.times[..end];
    let logs: Vec<f64> = report.deviations[..end].iter().map(|d| d.ln()).collect();
    if let Some((rate, _)) = linear_fit(ts, &logs) {
        report.fitted_rate = Some(rate);
        report.fit_window = Some((ts[0], ts[ts.len() - 1]));
        if sigma > 0.0 {
            report.relative_mismatch = Some((rate - sigma).abs() / sigma);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    fn cfg() -> TrialConfig {
        let g = Grid1D::new(20.0, 2001).unwrap();
        TrialConfig::new(g, 0.01).unwrap()
    }

    #[test]
    fn zero_amplitude_does_not_move() {
        // The reference is an equilibrium up to the Newton tolerance, so
        // motion stays at round-off level.
        let r = stability_trial(WaveKind::Kink { center: 0.0 }, -1.0, &[0.0], 5.0, &cfg()).unwrap();
        assert_eq!(r.rows[0].initial_deviation, 0.0);
        assert!(r.rows[0].sup_deviation < 1e-10, "{:?}", r.rows[0]);
        assert_eq!(r.verdict, StabilityVerdict::Stable);
    }

    #[test]
    fn rejects_bad_inputs() {
        let k = WaveKind::Kink { center: 0.0 };
        assert!(stability_trial(k, -1.0, &[1e-2, 1e-3], 5.0, &cfg()).is_err());
        assert!(stability_trial(k, -1.0, &[], 5.0, &cfg()).is_err());
        assert!(stability_trial(k, -1.0, &[-1e-3], 5.0, &cfg()).is_err());
        assert!(stability_trial(k, -1.0, &[1e-3], 0.0, &cfg()).is_err());
        let b = WaveKind::BoostedKink {
            speed: 0.5,
            center: 0.0,
        };
        assert!(stability_trial(b, -1.0, &[1e-3], 5.0, &cfg()).is_err());
        assert!(matches!(
            instability_trial(WaveKind::GroundState { q: 1.0 }, 1.0, 1e-4, 5.0, &cfg()),
            Err(Error::NoH1Wave { .. })
        ));
    }

    #[test]
    fn perturbation_is_unit_and_seeded() {
        let c = cfg();
        let k = WaveKind::Kink { center: 0.0 }.state(&c.grid, 0.0).unwrap();
        let (a1, a2) = perturbation_direction(&k, -1.0, 3).unwrap();
        let (b1, b2) = perturbation_direction(&k, -1.0, 3).unwrap();
        let (c1, _) = perturbation_direction(&k, -1.0, 4).unwrap();
        assert!((pair_norm(&c.grid, &a1, &a2).total - 1.0).abs() < 1e-12);
        assert_eq!((&a1, &a2), (&b1, &b2));
        assert_ne!(a1, c1);
        let n = a1.len();
        assert_eq!((a1[0], a1[n - 1], a2[0], a2[n - 1]), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_seed_is_degenerate() {
        let r = instability_trial(WaveKind::Kink { center: 0.0 }, 1.0, 0.0, 5.0, &cfg()).unwrap();
        assert!(r.is_degenerate());
        assert!(r.fitted_rate.is_none() && r.escape_time.is_none());
        assert!(r.predicted_rate > 0.0);
    }

    #[test]
    fn growth_matches_spectrum() {
        let r = instability_trial(WaveKind::Kink { center: 0.0 }, 1.0, 1e-4, 30.0, &cfg()).unwrap();
        assert!(r.relative_mismatch.unwrap() < 0.1, "{r:?}");
        assert!(r.escape_time.is_some());
        let (t0, t1) = r.fit_window.unwrap();
        assert!(t1 > t0);
        let end = r.times.iter().position(|&t| t > t1).unwrap();
        assert!(r.deviations[..end].iter().all(|&d| d < 10.0 * 1e-4));
    }

    #[test]
    fn growth_iff_negative_eigenvalue() {
        let c = cfg();
        for (w, q) in [
            (WaveKind::Kink { center: 0.0 }, 1.0),
            (WaveKind::Kink { center: 0.0 }, 4.0),
            (WaveKind::GroundState { q: 4.0 }, 4.0),
        ] {
            let r = instability_trial(w, q, 1e-4, 40.0, &c).unwrap();
            assert!(r.lambda1 < 0.0 && r.escape_time.is_some(), "{w:?} {q}");
        }
        for (w, q) in [
            (WaveKind::Kink { center: 0.0 }, -1.0),
            (WaveKind::GroundState { q: -4.0 }, -4.0),
        ] {
            let r = instability_trial(w, q, 1e-4, 40.0, &c);
            assert!(matches!(r, Err(Error::NoGrowth(_))), "{w:?} {q}: {r:?}");
        }
    }
}
