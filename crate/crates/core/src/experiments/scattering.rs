//! Kink-impurity scattering sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linear_fit;
use crate::dynamics::{check_cfl, step_plan, Integrator};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::impurity::ImpurityParams;
use crate::waves::{boosted_kink_state, kink_center};

/// A kink past `+CENTER_THRESHOLD` (moving right) was transmitted, one
/// behind `-CENTER_THRESHOLD` (moving left) was reflected.
pub const CENTER_THRESHOLD: f64 = 5.0;

/// Fraction of the run, counted from the end, used for the mean velocity.
const VELOCITY_WINDOW: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterClass {
    Transmit,
    Reflect,
    Capture,
}

impl ScatterClass {
    pub fn classify(center: f64, mean_velocity: f64) -> Self {
        if center > CENTER_THRESHOLD && mean_velocity > 0.0 {
            ScatterClass::Transmit
        } else if center < -CENTER_THRESHOLD && mean_velocity < 0.0 {
            ScatterClass::Reflect
        } else {
            ScatterClass::Capture
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub grid: Grid1D,
    pub dt: f64,
    /// Initial kink center.
    pub start: f64,
    /// Fixed observation time; `None` uses `distance / v`.
    pub horizon: Option<f64>,
    /// Distance scale of the speed-dependent horizon.
    pub distance: f64,
    /// Time between center samples.
    pub sample_interval: f64,
    /// Repeat every point on the grid with half the spacing.
    pub refine: bool,
}

impl Default for ScatterConfig {
    /// Default grid, `dt = dx / 2`, start at `x = -10`, `T(v) = 20 / v`.
    fn default() -> Self {
        let grid = Grid1D::new(crate::DEFAULT_HALF_WIDTH, crate::DEFAULT_NODE_COUNT)
            .expect("default grid is valid");
        let dt = 0.5 * grid.dx();
        Self {
            grid,
            dt,
            start: -10.0,
            horizon: None,
            distance: 20.0,
            sample_interval: 0.5,
            refine: false,
        }
    }
}

impl ScatterConfig {
    pub fn horizon_for(&self, speed: f64) -> f64 {
        self.horizon.unwrap_or(self.distance / speed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterOutcome {
    pub q: f64,
    pub speed: f64,
    pub horizon: f64,
    pub final_center: f64,
    pub mean_velocity: f64,
    pub class: ScatterClass,
    /// `|E(T) - E(0)| / (|E(0)| + 1)`.
    pub energy_drift: f64,
    /// Class on the refined grid, when requested.
    pub refined_class: Option<ScatterClass>,
}

impl ScatterOutcome {
    /// True unless a refined run disagrees.
    pub fn stable_under_refinement(&self) -> bool {
        self.refined_class.is_none_or(|c| c == self.class)
    }
}

struct Run {
    center: f64,
    velocity: f64,
    drift: f64,
}

fn run_one(grid: &Grid1D, dt: f64, q: f64, speed: f64, cfg: &ScatterConfig) -> Result<Run> {
    let horizon = cfg.horizon_for(speed);
    let (steps, dt) = step_plan(horizon, dt)?;
    check_cfl(grid, dt)?;
    let stride = ((cfg.sample_interval / dt).round() as usize).max(1);
    let mut state = boosted_kink_state(grid, speed, cfg.start, 0.0)?;
    let mut integ = Integrator::new(grid, &ImpurityParams::sharp(q))?;
    let e0 = integ.energy(&state).total;
    let mut times = Vec::new();
    let mut centers = Vec::new();
    let mut done = 0;
    while done < steps {
        let chunk = stride.min(steps - done);
        integ.advance(&mut state, dt, chunk)?;
        done += chunk;
        if let Some(c) = kink_center(&state) {
            times.push(state.time);
            centers.push(c);
        }
    }
    let e1 = integ.energy(&state).total;
    let Some(&center) = centers.last() else {
        return Err(Error::InvalidField(
            "no kink level crossing in the final state".into(),
        ));
    };
    let keep = ((times.len() as f64 * VELOCITY_WINDOW).ceil() as usize)
        .max(2)
        .min(times.len());
    let from = times.len() - keep;
    let velocity = linear_fit(&times[from..], &centers[from..]).map_or(0.0, |(a, _)| a);
    Ok(Run {
        center,
        velocity,
        drift: (e1 - e0).abs() / (e0.abs() + 1.0),
    })
}

/// Sends a boosted kink from `cfg.start` toward the impurity at each speed
/// and classifies where it ends up.
pub fn scattering_sweep(
    q: f64,
    speeds: &[f64],
    cfg: &ScatterConfig,
) -> Result<Vec<ScatterOutcome>> {
    if !q.is_finite() {
        return Err(Error::InvalidParameter(format!("coupling q = {q}")));
    }
    if let Some(&v) = speeds.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
        return if v.abs() >= 1.0 {
            Err(Error::Superluminal(v.abs()))
        } else {
            Err(Error::InvalidParameter(format!(
                "incoming speed {v} must lie in (0, 1)"
            )))
        };
    }
    check_cfl(&cfg.grid, cfg.dt)?;
    let fine = if cfg.refine {
        Some(Grid1D::new(cfg.grid.half_width(), 2 * cfg.grid.len() - 1)?)
    } else {
        None
    };
    speeds
        .par_iter()
        .map(|&v| -> Result<ScatterOutcome> {
            let run = run_one(&cfg.grid, cfg.dt, q, v, cfg)?;
            let class = ScatterClass::classify(run.center, run.velocity);
            let refined_class = match &fine {
                Some(g) => {
                    let r = run_one(g, 0.5 * cfg.dt, q, v, cfg)?;
                    Some(ScatterClass::classify(r.center, r.velocity))
                }
                None => None,
            };
            Ok(ScatterOutcome {
                q,
                speed: v,
                horizon: cfg.horizon_for(v),
                final_center: run.center,
                mean_velocity: run.velocity,
                class,
                energy_drift: run.drift,
                refined_class,
            })
        })
        .collect()
}
