//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sgdelta::dynamics::evolve;
use sgdelta::experiments::{
    instability_trial, minimize_energy, random_small_profile, scattering_sweep, stability_trial,
    ScatterConfig, TrialConfig,
};
use sgdelta::spectrum::{assemble_linearized, eigen_bottom};
use sgdelta::validation::{run_criterion, Check, CRITERIA};
use sgdelta::waves::{boosted_kink_state, ground_state, kink_center, kink_profile};
use sgdelta::{DeltaMode, EnergyBreakdown, FieldState, WaveKind};

use crate::config::{RunConfig, Scenario};
use crate::error::CliError;
use crate::output::{fmt_f64, fmt_opt, Outputs};
use crate::Command;

pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<String, CliError> {
    let mut out = Outputs::new(Path::new(&cfg.out_dir), cfg)?;
    let summary = match cmd {
        Command::Run => run(cfg, &mut out)?,
        Command::Spectrum => spectrum(cfg, &mut out)?,
        Command::Stability => stability(cfg, &mut out)?,
        Command::Instability => instability(cfg, &mut out)?,
        Command::Sweep => sweep(cfg, &mut out)?,
        Command::Minimize => minimize(cfg, &mut out)?,
        Command::Validate { criteria } => return validate(criteria, cfg, &mut out),
    };
    out.summary(&summary)?;
    Ok(summary)
}

fn initial_state(cfg: &RunConfig) -> Result<FieldState, CliError> {
    let g = cfg.grid()?;
    Ok(match cfg.scenario {
        Scenario::Vacuum => FieldState::zeros(&g),
        Scenario::Kink => kink_profile(&g, cfg.center)?,
        Scenario::GroundState => ground_state(&g, cfg.q)?,
        Scenario::BoostedKink => boosted_kink_state(&g, cfg.speed, cfg.center, 0.0)?,
    })
}

fn static_wave(cfg: &RunConfig) -> Result<WaveKind, CliError> {
    match cfg.scenario {
        Scenario::Kink => Ok(WaveKind::Kink { center: cfg.center }),
        Scenario::GroundState => Ok(WaveKind::GroundState { q: cfg.q }),
        s => Err(CliError::Config(format!(
            "scenario: trials need a static wave (kink or ground_state), got {s:?}"
        ))),
    }
}

fn trial_config(cfg: &RunConfig, sample_interval: f64) -> Result<TrialConfig, CliError> {
    Ok(TrialConfig::new(cfg.grid()?, cfg.time_step())?
        .with_seed(cfg.seed)
        .with_sample_interval(sample_interval))
}

fn energy_row(t: f64, e: &EnergyBreakdown, bound: f64) -> Vec<String> {
    [
        t,
        e.kinetic,
        e.gradient,
        e.potential,
        e.delta_term,
        e.total,
        bound,
    ]
    .into_iter()
    .map(fmt_f64)
    .collect()
}

fn field_rows(s: &FieldState) -> Vec<Vec<String>> {
    let g = s.grid();
    (0..g.len())
        .map(|i| vec![fmt_f64(g.x(i)), fmt_f64(s.u1[i]), fmt_f64(s.u2[i])])
        .collect()
}

#[derive(Serialize)]
struct RunReport {
    dt: f64,
    dx: f64,
    steps: usize,
    q: f64,
    delta_mode: DeltaMode,
    initial_energy: EnergyBreakdown,
    final_energy: EnergyBreakdown,
    max_relative_drift: f64,
    bound_growth: f64,
    final_kink_center: Option<f64>,
}

fn run(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let init = initial_state(cfg)?;
    let tr = evolve(
        &init,
        &cfg.impurity(),
        cfg.horizon,
        cfg.time_step(),
        cfg.output_stride,
    )?;
    let rows = tr
        .states
        .iter()
        .zip(&tr.energies)
        .zip(&tr.bound_norms)
        .map(|((s, e), b)| energy_row(s.time, e, *b));
    out.csv(
        "trajectory.csv",
        &[
            "t",
            "kinetic",
            "gradient",
            "potential",
            "delta_term",
            "total",
            "bound_norm",
        ],
        rows,
    )?;
    out.csv(
        "final_state.csv",
        &["x", "u1", "u2"],
        field_rows(tr.final_state()),
    )?;
    let report = RunReport {
        dt: tr.meta.dt,
        dx: tr.meta.dx,
        steps: tr.meta.steps,
        q: tr.meta.q,
        delta_mode: tr.meta.delta_mode,
        initial_energy: tr.energies[0],
        final_energy: *tr.energies.last().expect("initial energy stored"),
        max_relative_drift: tr.max_relative_drift(),
        bound_growth: tr.bound_growth(),
        final_kink_center: kink_center(tr.final_state()),
    };
    out.json("run.json", "run", cfg, &report)?;
    Ok(format!(
        "run: {:?}, q = {}, T = {}, {} steps of dt = {}\n  energy {} -> {} (max relative drift {:e})\n  bound growth {}\n",
        cfg.scenario,
        cfg.q,
        cfg.horizon,
        report.steps,
        report.dt,
        report.initial_energy.total,
        report.final_energy.total,
        report.max_relative_drift,
        report.bound_growth
    ))
}

fn spectrum(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let bg = initial_state(cfg)?;
    let op = assemble_linearized(&bg, cfg.q)?;
    let mut r = eigen_bottom(&op, cfg.spectrum.count, cfg.spectrum.tol)?;
    let vectors = std::mem::take(&mut r.eigenvectors);
    let g = bg.grid();
    let mut header = vec!["x".to_string()];
    header.extend((1..=vectors.len()).map(|j| format!("phi{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..g.len()).map(|i| {
        let mut row = vec![fmt_f64(g.x(i))];
        row.extend(vectors.iter().map(|v| fmt_f64(v[i])));
        row
    });
    out.csv("eigenvectors.csv", &header, rows)?;
    out.json("spectrum.json", "spectrum", cfg, &r)?;
    let mut s = format!(
        "spectrum: {:?}, q = {}\n  morse index {}, zero mode {}, growth rate {}\n  eigenvalues:",
        cfg.scenario, cfg.q, r.morse_index, r.has_zero_mode, r.growth_rate
    );
    for l in &r.eigenvalues {
        let _ = write!(s, " {l:.9}");
    }
    s.push('\n');
    Ok(s)
}

fn stability(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let tc = trial_config(cfg, cfg.stability.sample_interval)?;
    let r = stability_trial(
        static_wave(cfg)?,
        cfg.q,
        &cfg.stability.amplitudes,
        cfg.stability.horizon,
        &tc,
    )?;
    let rows = r.rows.iter().map(|row| {
        vec![
            fmt_f64(row.amplitude),
            fmt_f64(row.initial_deviation),
            fmt_f64(row.sup_deviation),
            fmt_f64(row.ratio),
            fmt_opt(row.escape_time),
            fmt_f64(row.energy_drift),
        ]
    });
    out.csv(
        "stability.csv",
        &[
            "amplitude",
            "initial_deviation",
            "sup_deviation",
            "ratio",
            "escape_time",
            "energy_drift",
        ],
        rows,
    )?;
    out.json("stability.json", "stability", cfg, &r)?;
    let mut s = format!(
        "stability: {:?}, q = {}, T = {}: {:?}\n",
        cfg.scenario, cfg.q, r.horizon, r.verdict
    );
    for row in &r.rows {
        let _ = writeln!(
            s,
            "  eps = {:e}: sup deviation {:e}, C = {:.4}{}",
            row.amplitude,
            row.sup_deviation,
            row.ratio,
            row.escape_time
                .map(|t| format!(", escaped at t = {t}"))
                .unwrap_or_default()
        );
    }
    Ok(s)
}

fn instability(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let tc = trial_config(cfg, cfg.instability.sample_interval)?;
    let mut r = instability_trial(
        static_wave(cfg)?,
        cfg.q,
        cfg.instability.seed_amplitude,
        cfg.instability.horizon,
        &tc,
    )?;
    let times = std::mem::take(&mut r.times);
    let devs = std::mem::take(&mut r.deviations);
    out.csv(
        "instability.csv",
        &["t", "deviation"],
        times
            .iter()
            .zip(&devs)
            .map(|(t, d)| vec![fmt_f64(*t), fmt_f64(*d)]),
    )?;
    out.json("instability.json", "instability", cfg, &r)?;
    Ok(format!(
        "instability: {:?}, q = {}\n  predicted rate {}, fitted rate {}, relative mismatch {}\n  escape time {}\n",
        cfg.scenario,
        cfg.q,
        r.predicted_rate,
        r.fitted_rate.map_or("-".into(), |v| v.to_string()),
        r.relative_mismatch.map_or("-".into(), |v| format!("{v:e}")),
        r.escape_time.map_or("none".into(), |v| v.to_string()),
    ))
}

fn sweep(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let sc = ScatterConfig {
        grid: cfg.grid()?,
        dt: cfg.time_step(),
        start: cfg.sweep.start,
        horizon: cfg.sweep.horizon,
        distance: cfg.sweep.distance,
        refine: cfg.sweep.refine,
        ..ScatterConfig::default()
    };
    let outcomes = scattering_sweep(cfg.q, &cfg.sweep.speeds, &sc)?;
    let rows = outcomes.iter().map(|o| {
        vec![
            fmt_f64(o.speed),
            fmt_f64(o.horizon),
            fmt_f64(o.final_center),
            fmt_f64(o.mean_velocity),
            format!("{:?}", o.class).to_lowercase(),
            fmt_f64(o.energy_drift),
            o.refined_class
                .map(|c| format!("{c:?}").to_lowercase())
                .unwrap_or_default(),
        ]
    });
    out.csv(
        "sweep.csv",
        &[
            "speed",
            "horizon",
            "final_center",
            "mean_velocity",
            "class",
            "energy_drift",
            "refined_class",
        ],
        rows,
    )?;
    out.json("sweep.json", "sweep", cfg, &outcomes)?;
    let mut s = format!("sweep: q = {}\n", cfg.q);
    for o in &outcomes {
        let _ = writeln!(
            s,
            "  v = {}: {:?} (center {:.3}, velocity {:.4}, drift {:e})",
            o.speed, o.class, o.final_center, o.mean_velocity, o.energy_drift
        );
    }
    Ok(s)
}

#[derive(Serialize)]
struct MinimizeSummary<'a> {
    sector: &'a sgdelta::experiments::Sector,
    q: f64,
    final_energy: f64,
    nearest: &'a sgdelta::experiments::KnownWave,
    distance: f64,
    iterations: usize,
    interior_residual: f64,
    gluing_residual: f64,
    monotone: bool,
}

fn minimize(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let g = cfg.grid()?;
    let sector = cfg.sector();
    let init = match cfg.scenario {
        Scenario::Vacuum => {
            FieldState::from_profile(g.clone(), random_small_profile(&g, 0.1, cfg.seed))?
        }
        Scenario::GroundState => {
            let q = ground_state(&g, cfg.q)?;
            FieldState::from_profile(
                g.clone(),
                q.u1.iter().map(|v| cfg.minimize.init_scale * v).collect(),
            )?
        }
        Scenario::Kink => kink_profile(&g, cfg.center)?,
        Scenario::BoostedKink => {
            return Err(CliError::Config(
                "scenario: minimize needs a static initial profile".into(),
            ))
        }
    };
    let r = minimize_energy(cfg.q, sector, &init, cfg.minimize.step_budget)?;
    out.csv(
        "profile.csv",
        &["x", "u"],
        (0..g.len()).map(|i| vec![fmt_f64(g.x(i)), fmt_f64(r.profile.u1[i])]),
    )?;
    out.csv(
        "energy_trace.csv",
        &["iteration", "energy"],
        r.energy_trace
            .iter()
            .enumerate()
            .map(|(k, e)| vec![k.to_string(), fmt_f64(*e)]),
    )?;
    let summary = MinimizeSummary {
        sector: &r.sector,
        q: r.q,
        final_energy: r.final_energy,
        nearest: &r.nearest,
        distance: r.distance,
        iterations: r.iterations,
        interior_residual: r.interior_residual,
        gluing_residual: r.gluing_residual,
        monotone: r.is_monotone(),
    };
    out.json("minimize.json", "minimize", cfg, &summary)?;
    Ok(format!(
        "minimize: {:?} sector, q = {}\n  energy {} after {} steps, nearest {:?} at H1 distance {:e}\n",
        sector, cfg.q, r.final_energy, r.iterations, r.nearest, r.distance
    ))
}

#[derive(Serialize)]
struct CriterionRecord<'a> {
    id: usize,
    name: &'a str,
    passed: bool,
    error: Option<&'a str>,
    checks: &'a [Check],
}

fn validate(ids: &[usize], cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let ids: Vec<usize> = if ids.is_empty() {
        (1..=CRITERIA.len()).collect()
    } else {
        ids.to_vec()
    };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA.len()) {
        return Err(CliError::Config(format!(
            "--criteria: no criterion {bad} (valid: 1..={})",
            CRITERIA.len()
        )));
    }
    let results: Vec<_> = ids.par_iter().map(|&i| run_criterion(i)).collect();
    let mut table = String::new();
    let mut live = String::new();
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(table, "{status} [{:>2}] {}", r.id, r.name);
        let _ = writeln!(live, "{}", r.summary_line());
        for c in &r.checks {
            let _ = writeln!(
                table,
                "       {} {}: {} (target {})",
                if c.passed { "ok  " } else { "FAIL" },
                c.label,
                c.value,
                c.target
            );
        }
        if let Some(e) = &r.error {
            let _ = writeln!(table, "       error: {e}");
        }
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    let _ = writeln!(
        table,
        "{} passed, {} failed",
        results.len() - failed.len(),
        failed.len()
    );
    out.csv(
        "validation.csv",
        &[
            "criterion",
            "passed",
            "check",
            "value",
            "target",
            "check_passed",
        ],
        results.iter().flat_map(|r| {
            r.checks.iter().map(move |c| {
                vec![
                    r.id.to_string(),
                    r.passed.to_string(),
                    format!("\"{}\"", c.label.replace('"', "'")),
                    fmt_f64(c.value),
                    format!("\"{}\"", c.target),
                    c.passed.to_string(),
                ]
            })
        }),
    )?;
    let records: Vec<CriterionRecord> = results
        .iter()
        .map(|r| CriterionRecord {
            id: r.id,
            name: &r.name,
            passed: r.passed,
            error: r.error.as_deref(),
            checks: &r.checks,
        })
        .collect();
    out.json("validation.json", "validate", cfg, &records)?;
    out.summary(&table)?;
    // Timings go to the terminal only so output files stay reproducible.
    print!("{live}");
    if failed.is_empty() {
        Ok(table)
    } else {
        print!("{table}");
        Err(CliError::Validation(format!("criteria failed: {failed:?}")))
    }
}
