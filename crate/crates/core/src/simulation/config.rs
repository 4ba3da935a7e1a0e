use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::comfort::{BoundsSchedule, ModeSchedule};
use crate::controllers::HeuristicConfig;
use crate::data::{generate_synthetic, load_aligned, AlignedSeries, DT_S, STEPS_PER_WEEK};
use crate::error::{Error, Result};
use crate::model::{BuildingParams, Multipliers, ParameterSet};
use crate::mpc::MpcConfig;

pub const DEFAULT_ROOMS: usize = 5;
pub const DEFAULT_WEEKS: usize = 9;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Hysteresis,
    Pc,
    Psc,
    Mpc,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [
        ControllerKind::Hysteresis,
        ControllerKind::Pc,
        ControllerKind::Psc,
        ControllerKind::Mpc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Hysteresis => "hysteresis",
            ControllerKind::Pc => "pc",
            ControllerKind::Psc => "psc",
            ControllerKind::Mpc => "mpc",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            Error::config(format!(
                "unknown controller `{s}` (expected one of: hysteresis, pc, psc, mpc)"
            ))
        })
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Base,
    Adaptive,
    Custom,
}

impl ScenarioKind {
    pub const BENCHMARK: [ScenarioKind; 2] = [ScenarioKind::Base, ScenarioKind::Adaptive];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Base => "base",
            ScenarioKind::Adaptive => "adaptive",
            ScenarioKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(ScenarioKind::Base),
            "adaptive" => Ok(ScenarioKind::Adaptive),
            "custom" => Ok(ScenarioKind::Custom),
            other => Err(Error::config(format!(
                "unknown scenario `{other}` (expected one of: base, adaptive, custom)"
            ))),
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "source")]
pub enum DataSource {
    Synthetic {
        #[serde(default)]
        seed: Option<u64>,
    },
    Files {
        #[serde(default)]
        dir: Option<PathBuf>,
        #[serde(default)]
        weather: Option<PathBuf>,
        #[serde(default)]
        prices: Option<PathBuf>,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic { seed: None }
    }
}

/// Everything needed to reproduce one closed-loop run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    /// Inline plan for the custom scenario.
    pub schedule: Option<ModeSchedule>,
    /// File holding the plan for the custom scenario.
    pub schedule_file: Option<PathBuf>,
    pub parameter_set: ParameterSet,
    pub controller: ControllerKind,
    pub rooms: usize,
    pub weeks: usize,
    pub seed: u64,
    pub dt: f64,
    pub warmup_hours: u32,
    /// Restart every week from the initial state with its own warm-up.
    pub reset_weekly: bool,
    pub initial_temperature_c: f64,
    /// Frozen per-room perturbations; drawn from `seed` when absent.
    pub multipliers: Option<Vec<Multipliers>>,
    pub data: DataSource,
    pub mpc: MpcConfig,
    pub heuristics: HeuristicConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Base,
            schedule: None,
            schedule_file: None,
            parameter_set: ParameterSet::High,
            controller: ControllerKind::Psc,
            rooms: DEFAULT_ROOMS,
            weeks: DEFAULT_WEEKS,
            seed: DEFAULT_SEED,
            dt: DT_S,
            warmup_hours: 24,
            reset_weekly: false,
            initial_temperature_c: 20.0,
            multipliers: None,
            data: DataSource::default(),
            mpc: MpcConfig::default(),
            heuristics: HeuristicConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.message().replace('\n', " ")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p.as_mut() {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut self.schedule_file);
        if let DataSource::Files { dir, weather, prices } = &mut self.data {
            fix(dir);
            fix(weather);
            fix(prices);
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialize config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.rooms == 0 {
            return Err(Error::config("rooms must be at least 1"));
        }
        if self.weeks == 0 {
            return Err(Error::config("weeks must be at least 1"));
        }
        if self.dt != DT_S {
            return Err(Error::config(format!(
                "dt must be {DT_S} s to match the 15-minute input grid, got {}",
                self.dt
            )));
        }
        if !self.warmup_hours.is_multiple_of(24) || self.warmup_hours > 24 * 7 {
            return Err(Error::config(format!(
                "warmup_hours must be a whole number of days up to one week, got {}",
                self.warmup_hours
            )));
        }
        if !(-50.0..=100.0).contains(&self.initial_temperature_c) {
            return Err(Error::config("initial_temperature_c outside [-50, 100]"));
        }
        if let Some(m) = &self.multipliers {
            if m.len() != self.rooms {
                return Err(Error::config(format!(
                    "{} multiplier sets for {} rooms",
                    m.len(),
                    self.rooms
                )));
            }
            m.iter().try_for_each(Multipliers::validate)?;
        }
        if self.scenario == ScenarioKind::Adaptive && self.rooms != 5 {
            return Err(Error::config(format!(
                "adaptive scenario is defined for exactly 5 rooms, got {}",
                self.rooms
            )));
        }
        if self.scenario == ScenarioKind::Custom && self.schedule.is_none() && self.schedule_file.is_none() {
            return Err(Error::config("custom scenario needs `schedule` or `schedule_file`"));
        }
        if let Some(s) = &self.schedule {
            s.validate()?;
        }
        self.mpc.validate()?;
        self.heuristics.validate()
    }

    pub fn frozen_multipliers(&self) -> Vec<Multipliers> {
        self.multipliers
            .clone()
            .unwrap_or_else(|| Multipliers::seeded(self.rooms, self.seed))
    }

    /// The same config with the random draws written out explicitly.
    pub fn frozen(&self) -> Self {
        let mut c = self.clone();
        c.multipliers = Some(self.frozen_multipliers());
        if let DataSource::Synthetic { seed: None } = c.data {
            c.data = DataSource::Synthetic { seed: Some(self.seed) };
        }
        c
    }

    pub fn building(&self) -> Result<BuildingParams> {
        BuildingParams::perturbed(self.parameter_set, self.frozen_multipliers())
    }

    pub fn mode_schedule(&self) -> Result<ModeSchedule> {
        let s = match self.scenario {
            ScenarioKind::Base => ModeSchedule::base(self.rooms),
            ScenarioKind::Adaptive => ModeSchedule::adaptive(),
            ScenarioKind::Custom => match (&self.schedule, &self.schedule_file) {
                (Some(s), _) => s.clone(),
                (None, Some(path)) => {
                    let text =
                        std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
                    ModeSchedule::from_toml(&text)?
                }
                (None, None) => return Err(Error::config("custom scenario needs a schedule")),
            },
        };
        if s.n_rooms() != self.rooms {
            return Err(Error::config(format!(
                "schedule covers {} rooms, config has {}",
                s.n_rooms(),
                self.rooms
            )));
        }
        Ok(s)
    }

    pub fn bounds(&self, start_minute: u32, steps: usize) -> Result<BoundsSchedule> {
        BoundsSchedule::from_schedule(&self.mode_schedule()?, start_minute, steps, self.dt)
    }

    /// Input data for this run, `weeks` whole weeks from the first midnight.
    ///
    /// `default_dir` is used when file input names neither files nor a directory.
    pub fn load_data(&self, default_dir: Option<&Path>) -> Result<AlignedSeries> {
        let series = match &self.data {
            DataSource::Synthetic { seed } => generate_synthetic(self.weeks, seed.unwrap_or(self.seed))?,
            DataSource::Files { dir, weather, prices } => {
                let dir = dir.as_deref().or(default_dir);
                let pick = |explicit: &Option<PathBuf>, name: &str| -> Result<PathBuf> {
                    explicit.clone().or_else(|| dir.map(|d| d.join(name))).ok_or_else(|| {
                        Error::config(format!("no path for {name}: set it in [data] or give a data directory"))
                    })
                };
                load_aligned(pick(weather, "weather.csv")?, pick(prices, "prices.csv")?)?
            }
        };
        let required = self.weeks * STEPS_PER_WEEK;
        if series.len() < required {
            return Err(crate::error::DataError::TooShort {
                available: series.len(),
                required,
            }
            .into());
        }
        Ok(series.slice(0, required))
    }
}
