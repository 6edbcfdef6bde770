//! Run configuration: TOML document, documented defaults, validation.

use serde::{Deserialize, Serialize};
use sgdelta::experiments::Sector;
use sgdelta::waves::matching_root;
use sgdelta::{DeltaMode, Grid1D, ImpurityParams};

use crate::error::CliError;

/// Initial datum or background wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Vacuum,
    #[default]
    Kink,
    GroundState,
    BoostedKink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub half_width: f64,
    pub node_count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: sgdelta::DEFAULT_HALF_WIDTH,
            node_count: sgdelta::DEFAULT_NODE_COUNT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub count: usize,
    pub tol: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            count: 4,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityConfig {
    pub amplitudes: Vec<f64>,
    pub horizon: f64,
    pub sample_interval: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            amplitudes: vec![1e-3, 1e-2],
            horizon: 200.0,
            sample_interval: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstabilityConfig {
    pub seed_amplitude: f64,
    pub horizon: f64,
    pub sample_interval: f64,
}

impl Default for InstabilityConfig {
    fn default() -> Self {
        Self {
            seed_amplitude: 1e-4,
            horizon: 60.0,
            sample_interval: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub speeds: Vec<f64>,
    pub start: f64,
    /// Fixed observation time; absent means `distance / v`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub distance: f64,
    pub refine: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            speeds: vec![0.05, 0.2, 0.5, 0.8],
            start: -10.0,
            horizon: None,
            distance: 20.0,
            refine: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinimizeConfig {
    /// Absent: degree 1 for kink scenarios, free otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector: Option<Sector>,
    /// Multiplies the ground-state profile used as the starting point. The
    /// vacuum scenario starts from a seeded random profile of peak 0.1.
    pub init_scale: f64,
    pub step_budget: usize,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            sector: None,
            init_scale: 0.9,
            step_budget: 20_000,
        }
    }
}

/// `[delta]` table. Read through a flat struct so that stray keys are
/// rejected for every kind, including `sharp`.
mod delta_section {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use sgdelta::{DeltaMode, MollifierCoupling};

    #[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq)]
    #[serde(rename_all = "snake_case")]
    enum Kind {
        Sharp,
        Mollified,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Section {
        kind: Kind,
        #[serde(skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        coupling: Option<MollifierCoupling>,
    }

    pub fn serialize<S: Serializer>(mode: &DeltaMode, s: S) -> Result<S::Ok, S::Error> {
        let section = match *mode {
            DeltaMode::Sharp => Section {
                kind: Kind::Sharp,
                eps: None,
                coupling: None,
            },
            DeltaMode::Mollified { eps, coupling } => Section {
                kind: Kind::Mollified,
                eps: Some(eps),
                coupling: Some(coupling),
            },
        };
        section.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DeltaMode, D::Error> {
        use serde::de::Error;
        let s = Section::deserialize(d)?;
        match (s.kind, s.eps) {
            (Kind::Sharp, None) if s.coupling.is_none() => Ok(DeltaMode::Sharp),
            (Kind::Sharp, _) => Err(D::Error::custom(
                "delta: `eps` and `coupling` apply only to kind = \"mollified\"",
            )),
            (Kind::Mollified, Some(eps)) => Ok(DeltaMode::Mollified {
                eps,
                coupling: s.coupling.unwrap_or_default(),
            }),
            (Kind::Mollified, None) => Err(D::Error::missing_field("eps")),
        }
    }
}

/// Everything a subcommand needs. Unknown keys are rejected at every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub q: f64,
    #[serde(with = "delta_section")]
    pub delta: DeltaMode,
    pub grid: GridConfig,
    /// Absent in a document means `dx / 2`; always present after parsing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub horizon: f64,
    pub output_stride: usize,
    pub center: f64,
    pub speed: f64,
    pub seed: u64,
    pub out_dir: String,
    pub spectrum: SpectrumConfig,
    pub stability: StabilityConfig,
    pub instability: InstabilityConfig,
    pub sweep: SweepConfig,
    pub minimize: MinimizeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Kink,
            q: -1.0,
            delta: DeltaMode::Sharp,
            grid: GridConfig::default(),
            dt: None,
            horizon: 10.0,
            output_stride: 100,
            center: 0.0,
            speed: 0.5,
            seed: 0,
            out_dir: "out".into(),
            spectrum: SpectrumConfig::default(),
            stability: StabilityConfig::default(),
            instability: InstabilityConfig::default(),
            sweep: SweepConfig::default(),
            minimize: MinimizeConfig::default(),
        }
    }
}

fn config_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn physics_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Physics(format!("{field}: {msg}"))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config_err(
            field,
            format!("must be a positive finite number, got {v}"),
        ))
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid1D, CliError> {
        Grid1D::new(self.grid.half_width, self.grid.node_count).map_err(|e| config_err("grid", e))
    }

    pub fn impurity(&self) -> ImpurityParams {
        ImpurityParams {
            q: self.q,
            delta_mode: self.delta,
        }
    }

    /// Time step after default expansion.
    pub fn time_step(&self) -> f64 {
        self.dt.expect("dt is filled in by parse_config")
    }

    pub fn sector(&self) -> Sector {
        self.minimize.sector.unwrap_or(match self.scenario {
            Scenario::Kink | Scenario::BoostedKink => Sector::Degree1,
            _ => Sector::FreeH1,
        })
    }

    /// Checks every field against the preconditions of the modules it
    /// feeds and fills in derived defaults.
    pub fn validate(mut self) -> Result<Self, CliError> {
        let grid = self.grid()?;
        if !self.q.is_finite() {
            return Err(config_err("q", format!("must be finite, got {}", self.q)));
        }
        let dt = *self.dt.get_or_insert(0.5 * grid.dx());
        positive("dt", dt)?;
        if dt > sgdelta::dynamics::CFL_LIMIT * grid.dx() {
            return Err(physics_err(
                "dt",
                format!(
                    "{dt} violates the CFL condition dt <= {} dx = {}",
                    sgdelta::dynamics::CFL_LIMIT,
                    sgdelta::dynamics::CFL_LIMIT * grid.dx()
                ),
            ));
        }
        if !(self.horizon.is_finite() && self.horizon != 0.0) {
            return Err(config_err(
                "horizon",
                format!("must be finite and nonzero, got {}", self.horizon),
            ));
        }
        if self.output_stride == 0 {
            return Err(config_err("output_stride", "must be at least 1"));
        }
        if !self.center.is_finite() {
            return Err(config_err("center", "must be finite"));
        }
        if let DeltaMode::Mollified { eps, .. } = self.delta {
            positive("delta.eps", eps)?;
            self.impurity()
                .discretize(&grid)
                .map_err(|e| physics_err("delta.eps", e))?;
        }
        match self.scenario {
            Scenario::GroundState => {
                let root = matching_root(self.q).map_err(|e| physics_err("q", e))?;
                if !root.exists {
                    return Err(physics_err(
                        "q",
                        format!(
                            "scenario ground_state needs |q| > 2: for |q| <= 2 there is no stationary H^1 wave other than 0 (got q = {})",
                            self.q
                        ),
                    ));
                }
            }
            Scenario::BoostedKink => {
                if !(self.speed.abs() < 1.0) {
                    return Err(physics_err(
                        "speed",
                        format!(
                            "boosted kink needs a subluminal speed |v| < 1 (got {})",
                            self.speed
                        ),
                    ));
                }
            }
            _ => {}
        }
        if self.spectrum.count == 0 {
            return Err(config_err("spectrum.count", "must be at least 1"));
        }
        positive("spectrum.tol", self.spectrum.tol)?;
        let amps = &self.stability.amplitudes;
        if amps.is_empty()
            || amps.iter().any(|a| !(a.is_finite() && *a >= 0.0))
            || amps.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(config_err(
                "stability.amplitudes",
                "must be a non-empty, strictly increasing list of non-negative numbers",
            ));
        }
        positive("stability.horizon", self.stability.horizon)?;
        positive("stability.sample_interval", self.stability.sample_interval)?;
        let s = self.instability.seed_amplitude;
        if !(s.is_finite() && s >= 0.0) {
            return Err(config_err(
                "instability.seed_amplitude",
                "must be non-negative",
            ));
        }
        positive("instability.horizon", self.instability.horizon)?;
        positive(
            "instability.sample_interval",
            self.instability.sample_interval,
        )?;
        if self.sweep.speeds.is_empty() {
            return Err(config_err("sweep.speeds", "must not be empty"));
        }
        for &v in &self.sweep.speeds {
            if !(v.abs() < 1.0) {
                return Err(physics_err(
                    "sweep.speeds",
                    format!("incoming kinks need a subluminal speed |v| < 1 (got {v})"),
                ));
            }
            if !(v > 0.0) {
                return Err(config_err(
                    "sweep.speeds",
                    format!("speeds must lie in (0, 1), got {v}"),
                ));
            }
        }
        if !self.sweep.start.is_finite() {
            return Err(config_err("sweep.start", "must be finite"));
        }
        if let Some(h) = self.sweep.horizon {
            positive("sweep.horizon", h)?;
        }
        positive("sweep.distance", self.sweep.distance)?;
        positive("minimize.init_scale", self.minimize.init_scale)?;
        if self.minimize.step_budget == 0 {
            return Err(config_err("minimize.step_budget", "must be at least 1"));
        }
        Ok(self)
    }
}

/// Parses and validates a TOML document; an empty document gives the
/// defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig =
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
    cfg.validate()
}

/// TOML rendering of a (validated) config.
pub fn render_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}
