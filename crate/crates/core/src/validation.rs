//! The acceptance suite: twelve oracle-based checks on waves, dynamics,
//! spectra and experiments, each reported as measured value vs target.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, linear_kg_reference, LinearStepper};
use crate::energy::{deviation_norm, energy};
use crate::error::Result;
use crate::experiments::{
    instability_trial, minimize_energy, mollified_convergence, random_small_profile,
    scattering_sweep, stability_trial, KnownWave, ScatterClass, ScatterConfig, Sector, TrialConfig,
};
use crate::grid::{FieldState, Grid1D};
use crate::impurity::ImpurityParams;
use crate::spectrum::{assemble_linearized, eigen_bottom, SpectralReport};
use crate::waves::{ground_state, kink_profile, WaveKind};

/// One measured quantity and its acceptance rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    /// Human-readable target, e.g. `"0.75 ± 1e-3"`.
    pub target: String,
    pub passed: bool,
}

impl Check {
    fn near(label: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            value,
            target: format!("{expected} ± {tol:e}"),
            passed: (value - expected).abs() <= tol,
        }
    }

    fn at_most(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            value,
            target: format!("<= {bound:e}"),
            passed: value <= bound,
        }
    }

    fn flag(label: impl Into<String>, ok: bool, target: &str) -> Self {
        Self {
            label: label.into(),
            value: if ok { 1.0 } else { 0.0 },
            target: target.into(),
            passed: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub checks: Vec<Check>,
    /// Set when the criterion could not be evaluated.
    pub error: Option<String>,
    pub passed: bool,
    pub elapsed_secs: f64,
}

impl CriterionResult {
    /// `PASS [ 3] closed-form energies (0.4s)` style line.
    pub fn summary_line(&self) -> String {
        format!(
            "{} [{:>2}] {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_secs
        )
    }
}

pub const CRITERIA: [&str; 12] = [
    "zero-background bound state",
    "ground-state existence boundary",
    "closed-form energies",
    "stationarity under evolution",
    "spectral dichotomy",
    "kernel triviality",
    "growth-rate consistency",
    "nonlinear stability",
    "minimization oracle",
    "linear Klein-Gordon oracle",
    "mollified convergence",
    "scattering sanity",
];

/// Runs criterion `id` (1-based). Unknown ids yield a failed result.
pub fn run_criterion(id: usize) -> CriterionResult {
    let clock = Instant::now();
    let outcome = match id {
        1 => zero_background(),
        2 => existence_boundary(),
        3 => closed_form_energies(),
        4 => stationarity(),
        5 => spectral_dichotomy(),
        6 => kernel_triviality(),
        7 => growth_rate(),
        8 => nonlinear_stability(),
        9 => minimization(),
        10 => linear_oracle(),
        11 => mollified(),
        12 => scattering(),
        _ => Err(crate::Error::InvalidParameter(format!("no criterion {id}"))),
    };
    let name = CRITERIA
        .get(id.wrapping_sub(1))
        .copied()
        .unwrap_or("unknown")
        .to_string();
    let (checks, error) = match outcome {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let passed = error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.passed);
    CriterionResult {
        id,
        name,
        checks,
        error,
        passed,
        elapsed_secs: clock.elapsed().as_secs_f64(),
    }
}

/// All twelve criteria in order.
pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERIA.len()).map(run_criterion).collect()
}

fn dynamics_grid() -> Result<Grid1D> {
    Grid1D::new(20.0, 4001)
}

const DYNAMICS_DT: f64 = 0.005;

fn spectrum_of(bg: &FieldState, q: f64, count: usize) -> Result<SpectralReport> {
    eigen_bottom(&assemble_linearized(bg, q)?, count, 1e-6)
}

fn zero_background() -> Result<Vec<Check>> {
    let g = Grid1D::new(40.0, 8001)?;
    let bg = FieldState::zeros(&g);
    let mut out = Vec::new();
    for q in [-1.0, -1.5] {
        let r = spectrum_of(&bg, q, 1)?;
        out.push(Check::near(
            format!("lambda1(q = {q})"),
            r.eigenvalues[0],
            1.0 - q * q / 4.0,
            1e-3,
        ));
    }
    Ok(out)
}

fn existence_boundary() -> Result<Vec<Check>> {
    let g = dynamics_grid()?;
    let mut out = Vec::new();
    for q in [-2.0, -1.0, 0.5, 2.0] {
        out.push(Check::flag(
            format!("no ground state at q = {q}"),
            ground_state(&g, q).is_err(),
            "error",
        ));
    }
    for q in [-4.0, -2.1, 2.1, 6.0] {
        out.push(Check::flag(
            format!("ground state at q = {q}"),
            ground_state(&g, q).is_ok(),
            "ok",
        ));
        let r = WaveKind::GroundState { q }.gluing_residual_exact(q)?;
        out.push(Check::at_most(
            format!("|gluing residual| at q = {q}"),
            r.abs(),
            1e-10,
        ));
    }
    Ok(out)
}

fn closed_form_energies() -> Result<Vec<Check>> {
    let g = Grid1D::new(20.0, 40001)?;
    let mut out = Vec::new();
    let k = kink_profile(&g, 0.0)?;
    for q in [-1.0, 1.0] {
        let e = energy(&k, &ImpurityParams::sharp(q))?.total;
        out.push(Check::near(
            format!("E(K, q = {q})"),
            e,
            8.0 + 2.0 * q,
            1e-6,
        ));
    }
    let e = energy(&ground_state(&g, -4.0)?, &ImpurityParams::sharp(-4.0))?.total;
    out.push(Check::near("E(Q, q = -4)", e, -2.0, 1e-6));
    Ok(out)
}

fn stationarity() -> Result<Vec<Check>> {
    let g = dynamics_grid()?;
    let mut out = Vec::new();
    for (name, wave, q) in [
        ("Q", ground_state(&g, -4.0)?, -4.0),
        ("K", kink_profile(&g, 0.0)?, -1.0),
    ] {
        let tr = evolve(&wave, &ImpurityParams::sharp(q), 50.0, DYNAMICS_DT, 100)?;
        let mut dev = 0.0f64;
        for s in &tr.states {
            dev = dev.max(deviation_norm(s, &wave)?.total);
        }
        out.push(Check::at_most(
            format!("sup deviation ({name}, q = {q})"),
            dev,
            1e-3,
        ));
        out.push(Check::at_most(
            format!("energy drift ({name}, q = {q})"),
            tr.max_relative_drift(),
            1e-4,
        ));
    }
    Ok(out)
}

fn spectral_cases() -> Result<Vec<(String, FieldState, f64)>> {
    let g = dynamics_grid()?;
    let k = kink_profile(&g, 0.0)?;
    Ok(vec![
        ("K, q = 1".into(), k.clone(), 1.0),
        ("K, q = 4".into(), k.clone(), 4.0),
        ("Q, q = 4".into(), ground_state(&g, 4.0)?, 4.0),
        ("K, q = -1".into(), k, -1.0),
        ("Q, q = -4".into(), ground_state(&g, -4.0)?, -4.0),
    ])
}

fn spectral_dichotomy() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (i, (name, bg, q)) in spectral_cases()?.into_iter().enumerate() {
        let r = spectrum_of(&bg, q, 1)?;
        let expected = if i < 3 { 1.0 } else { 0.0 };
        out.push(Check::near(
            format!("morse index ({name})"),
            r.morse_index as f64,
            expected,
            0.0,
        ));
        out.push(Check::at_most(
            format!("morse index bound ({name})"),
            r.morse_index as f64,
            1.0,
        ));
        if i >= 3 {
            out.push(Check::flag(
                format!("lambda1 > 0 ({name})"),
                r.eigenvalues[0] > 0.0,
                "> 0",
            ));
        }
    }
    Ok(out)
}

fn kernel_triviality() -> Result<Vec<Check>> {
    let g = dynamics_grid()?;
    let k = kink_profile(&g, 0.0)?;
    let mut out = Vec::new();
    let cases = [
        ("K, q = 1", k.clone(), 1.0),
        ("K, q = -1", k.clone(), -1.0),
        ("Q, q = 4", ground_state(&g, 4.0)?, 4.0),
        ("Q, q = -4", ground_state(&g, -4.0)?, -4.0),
    ];
    for (name, bg, q) in cases {
        let r = spectrum_of(&bg, q, 3)?;
        let closest = r
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, l| m.min(l.abs()));
        out.push(Check {
            label: format!("min |lambda| ({name})"),
            value: closest,
            target: format!("> tol_zero = {:e}", r.tol_zero),
            passed: !r.has_zero_mode && closest > r.tol_zero,
        });
    }
    let r = spectrum_of(&k, 0.0, 1)?;
    out.push(Check::flag(
        "zero mode present (K, q = 0)",
        r.has_zero_mode,
        "present",
    ));
    let kx = g.sample(|x| 2.0 / x.cosh());
    let nrm = g.l2_norm(&kx);
    let diff: Vec<f64> = kx
        .iter()
        .zip(&r.eigenvectors[0])
        .map(|(a, b)| a / nrm - b)
        .collect();
    let sum: Vec<f64> = kx
        .iter()
        .zip(&r.eigenvectors[0])
        .map(|(a, b)| a / nrm + b)
        .collect();
    let err = g.l2_norm(&diff).min(g.l2_norm(&sum));
    out.push(Check::at_most("zero mode vs K_x (L2)", err, 1e-3));
    Ok(out)
}

fn trial_config() -> Result<TrialConfig> {
    TrialConfig::new(dynamics_grid()?, DYNAMICS_DT)
}

fn growth_rate() -> Result<Vec<Check>> {
    let r = instability_trial(
        WaveKind::Kink { center: 0.0 },
        1.0,
        1e-4,
        60.0,
        &trial_config()?,
    )?;
    let mut out = vec![Check::at_most(
        "relative mismatch of fitted rate vs sqrt(-lambda1)",
        r.relative_mismatch.unwrap_or(f64::INFINITY),
        0.1,
    )];
    out.push(Check::flag(
        "fitted rate reported",
        r.fitted_rate.is_some(),
        "present",
    ));
    Ok(out)
}

fn nonlinear_stability() -> Result<Vec<Check>> {
    let cfg = trial_config()?;
    let mut out = Vec::new();
    for (name, wave, q) in [
        ("K, q = -1", WaveKind::Kink { center: 0.0 }, -1.0),
        ("Q, q = -4", WaveKind::GroundState { q: -4.0 }, -4.0),
    ] {
        let r = stability_trial(wave, q, &[1e-3, 1e-2], 200.0, &cfg)?;
        for row in &r.rows {
            out.push(Check::at_most(
                format!("C_measured ({name}, eps = {:e})", row.amplitude),
                row.ratio,
                10.0,
            ));
            out.push(Check::flag(
                format!("no escape ({name}, eps = {:e})", row.amplitude),
                row.escape_time.is_none(),
                "none",
            ));
        }
    }
    Ok(out)
}

fn minimization() -> Result<Vec<Check>> {
    let g = dynamics_grid()?;
    let budget = 20_000;
    let mut out = Vec::new();
    let small = FieldState::from_profile(g.clone(), random_small_profile(&g, 0.1, 0))?;
    let r = minimize_energy(-1.0, Sector::FreeH1, &small, budget)?;
    out.push(Check::at_most(
        "|E| (q = -1, free)",
        r.final_energy.abs(),
        1e-6,
    ));
    out.push(Check::flag(
        "nearest is 0 (q = -1, free)",
        r.nearest == KnownWave::Vacuum,
        "vacuum",
    ));
    out.push(Check::flag(
        "monotone descent (q = -1, free)",
        r.is_monotone(),
        "monotone",
    ));
    let q = ground_state(&g, -4.0)?;
    let init = FieldState::from_profile(g.clone(), q.u1.iter().map(|v| 0.9 * v).collect())?;
    let r = minimize_energy(-4.0, Sector::FreeH1, &init, budget)?;
    out.push(Check::near("E (q = -4, free)", r.final_energy, -2.0, 1e-4));
    out.push(Check::flag(
        "nearest is Q (q = -4, free)",
        r.nearest == KnownWave::GroundState,
        "Q",
    ));
    out.push(Check::flag(
        "monotone descent (q = -4, free)",
        r.is_monotone(),
        "monotone",
    ));
    let r = minimize_energy(-1.0, Sector::Degree1, &kink_profile(&g, 1.0)?, budget)?;
    out.push(Check::near(
        "E (q = -1, degree 1)",
        r.final_energy,
        6.0,
        1e-4,
    ));
    out.push(Check::flag(
        "nearest is K (q = -1, degree 1)",
        r.nearest == KnownWave::Kink,
        "K",
    ));
    out.push(Check::flag(
        "monotone descent (q = -1, degree 1)",
        r.is_monotone(),
        "monotone",
    ));
    Ok(out)
}

/// Max-norm error of the finite-difference linear solution against the
/// Bessel-kernel solution for a Gaussian velocity datum at `t = 1`.
pub fn linear_oracle_error(node_count: usize) -> Result<f64> {
    let g = Grid1D::new(8.0, node_count)?;
    let n = g.len();
    let init = FieldState::new(g.clone(), vec![0.0; n], g.sample(|x| (-x * x).exp()), 0.0)?;
    let exact = linear_kg_reference(&init, 1.0)?;
    let fd = LinearStepper::new(&g).evolve(&init, 1.0, 0.5 * g.dx())?;
    Ok(exact
        .u1
        .iter()
        .zip(&fd.u1)
        .chain(exact.u2.iter().zip(&fd.u2))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

fn linear_oracle() -> Result<Vec<Check>> {
    let errs = [401, 801, 1601]
        .iter()
        .map(|&n| linear_oracle_error(n))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        Check::near("error ratio dx 0.04 -> 0.02", errs[0] / errs[1], 4.0, 1.0),
        Check::near("error ratio dx 0.02 -> 0.01", errs[1] / errs[2], 4.0, 1.0),
    ])
}

fn mollified() -> Result<Vec<Check>> {
    let g = dynamics_grid()?;
    let r = mollified_convergence(
        &ground_state(&g, -4.0)?,
        -4.0,
        &[0.4, 0.2, 0.1, 0.05],
        10.0,
        DYNAMICS_DT,
    )?;
    let mut out: Vec<Check> = r
        .rows
        .iter()
        .map(|row| Check {
            label: format!("deviation at eps = {}", row.eps),
            value: row.deviation,
            target: "decreasing".into(),
            passed: true,
        })
        .collect();
    out.push(Check::flag(
        "strictly decreasing in eps",
        r.monotone,
        "monotone",
    ));
    Ok(out)
}

fn scattering() -> Result<Vec<Check>> {
    let mut cfg = ScatterConfig {
        grid: dynamics_grid()?,
        dt: DYNAMICS_DT,
        ..ScatterConfig::default()
    };
    let mut out = Vec::new();
    for o in scattering_sweep(0.0, &[0.1, 0.3, 0.5, 0.8], &cfg)? {
        out.push(Check::flag(
            format!("q = 0, v = {}: transmit", o.speed),
            o.class == ScatterClass::Transmit,
            "transmit",
        ));
        out.push(Check::at_most(
            format!("q = 0, v = {}: |exit speed - v|", o.speed),
            (o.mean_velocity - o.speed).abs(),
            1e-2,
        ));
    }
    cfg.refine = true;
    for (o, want) in scattering_sweep(-0.5, &[0.05, 0.8], &cfg)?
        .into_iter()
        .zip([ScatterClass::Capture, ScatterClass::Transmit])
    {
        out.push(Check::flag(
            format!("q = -0.5, v = {}: {want:?}", o.speed),
            o.class == want,
            &format!("{want:?}"),
        ));
        out.push(Check::flag(
            format!("q = -0.5, v = {}: class unchanged at dx/2", o.speed),
            o.stable_under_refinement(),
            "unchanged",
        ));
        out.push(Check::at_most(
            format!("q = -0.5, v = {}: energy drift", o.speed),
            o.energy_drift,
            1e-3,
        ));
    }
    Ok(out)
}
