use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-node RC parameters of a single room.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomParams {
    /// Heat capacity of the room air, J/K.
    pub air_capacity: f64,
    /// Heat capacity of the heat-accumulating medium (walls, furniture), J/K.
    pub mass_capacity: f64,
    /// Resistance between air and medium, K/W.
    pub mass_resistance: f64,
    /// Resistance between air and ambient, K/W.
    pub ambient_resistance: f64,
    /// Solar heat gain factor, m².
    pub solar_gain: f64,
}

impl RoomParams {
    pub const HIGH_CAPACITANCE: RoomParams = RoomParams {
        air_capacity: 3_407_040.0,
        mass_capacity: 11_482_560.0,
        mass_resistance: 0.001197,
        ambient_resistance: 0.07345,
        solar_gain: 1.138,
    };

    pub const LOW_CAPACITANCE: RoomParams = RoomParams {
        air_capacity: 1_703_520.0,
        mass_capacity: 5_741_280.0,
        mass_resistance: 0.001197,
        ambient_resistance: 0.07345,
        solar_gain: 1.138,
    };

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("air_capacity", self.air_capacity),
            ("mass_capacity", self.mass_capacity),
            ("mass_resistance", self.mass_resistance),
            ("ambient_resistance", self.ambient_resistance),
            ("solar_gain", self.solar_gain),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(format!(
                    "room parameter {name} must be finite and positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Applies per-parameter scaling factors.
    pub fn scaled(&self, m: &Multipliers) -> RoomParams {
        RoomParams {
            air_capacity: self.air_capacity * m.air_capacity,
            mass_capacity: self.mass_capacity * m.mass_capacity,
            mass_resistance: self.mass_resistance * m.mass_resistance,
            ambient_resistance: self.ambient_resistance * m.ambient_resistance,
            solar_gain: self.solar_gain * m.solar_gain,
        }
    }
}

/// Named parameter sets of the reference building.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParameterSet {
    High,
    Low,
}

impl ParameterSet {
    pub const ALL: [ParameterSet; 2] = [ParameterSet::High, ParameterSet::Low];

    pub fn room(self) -> RoomParams {
        match self {
            ParameterSet::High => RoomParams::HIGH_CAPACITANCE,
            ParameterSet::Low => RoomParams::LOW_CAPACITANCE,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParameterSet::High => "high",
            ParameterSet::Low => "low",
        }
    }
}

impl std::str::FromStr for ParameterSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(ParameterSet::High),
            "low" => Ok(ParameterSet::Low),
            other => Err(Error::config(format!(
                "unknown parameter set `{other}` (expected one of: high, low)"
            ))),
        }
    }
}

impl std::fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-room scaling factors, one per RC parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub air_capacity: f64,
    pub mass_capacity: f64,
    pub mass_resistance: f64,
    pub ambient_resistance: f64,
    pub solar_gain: f64,
}

impl Multipliers {
    pub const LOWER: f64 = 0.95;
    pub const UPPER: f64 = 1.05;

    pub const IDENTITY: Multipliers = Multipliers {
        air_capacity: 1.0,
        mass_capacity: 1.0,
        mass_resistance: 1.0,
        ambient_resistance: 1.0,
        solar_gain: 1.0,
    };

    fn as_array(&self) -> [f64; 5] {
        [
            self.air_capacity,
            self.mass_capacity,
            self.mass_resistance,
            self.ambient_resistance,
            self.solar_gain,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for v in self.as_array() {
            if !(Self::LOWER..=Self::UPPER).contains(&v) {
                return Err(Error::config(format!(
                    "multiplier {v} outside [{}, {}]",
                    Self::LOWER,
                    Self::UPPER
                )));
            }
        }
        Ok(())
    }

    /// Draws `rooms` multiplier sets uniformly from [0.95, 1.05].
    ///
    /// The stream is ChaCha8 seeded from `seed`; the result is meant to be
    /// frozen into the run configuration rather than regenerated.
    pub fn seeded(rooms: usize, seed: u64) -> Vec<Multipliers> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rooms)
            .map(|_| {
                let mut draw = || rng.random_range(Self::LOWER..=Self::UPPER);
                Multipliers {
                    air_capacity: draw(),
                    mass_capacity: draw(),
                    mass_resistance: draw(),
                    ambient_resistance: draw(),
                    solar_gain: draw(),
                }
            })
            .collect()
    }
}

/// Perturbed per-room parameters of the whole building.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "BuildingParamsRepr", try_from = "BuildingParamsRepr")]
pub struct BuildingParams {
    nominal: Vec<RoomParams>,
    multipliers: Vec<Multipliers>,
    rooms: Vec<RoomParams>,
}

#[derive(Serialize, Deserialize)]
struct BuildingParamsRepr {
    nominal: Vec<RoomParams>,
    multipliers: Vec<Multipliers>,
}

impl From<BuildingParams> for BuildingParamsRepr {
    fn from(b: BuildingParams) -> Self {
        Self {
            nominal: b.nominal,
            multipliers: b.multipliers,
        }
    }
}

impl TryFrom<BuildingParamsRepr> for BuildingParams {
    type Error = Error;

    fn try_from(r: BuildingParamsRepr) -> Result<Self> {
        BuildingParams::new(r.nominal, r.multipliers)
    }
}

impl BuildingParams {
    pub fn new(nominal: Vec<RoomParams>, multipliers: Vec<Multipliers>) -> Result<Self> {
        if nominal.is_empty() {
            return Err(Error::config("building needs at least one room"));
        }
        if nominal.len() != multipliers.len() {
            return Err(Error::config(format!(
                "{} rooms but {} multiplier sets",
                nominal.len(),
                multipliers.len()
            )));
        }
        for (room, m) in nominal.iter().zip(&multipliers) {
            room.validate()?;
            m.validate()?;
        }
        let rooms = nominal.iter().zip(&multipliers).map(|(r, m)| r.scaled(m)).collect();
        Ok(Self {
            nominal,
            multipliers,
            rooms,
        })
    }

    /// `n` identical rooms of the given set, unperturbed.
    pub fn uniform(set: ParameterSet, n: usize) -> Result<Self> {
        Self::new(vec![set.room(); n], vec![Multipliers::IDENTITY; n])
    }

    pub fn perturbed(set: ParameterSet, multipliers: Vec<Multipliers>) -> Result<Self> {
        Self::new(vec![set.room(); multipliers.len()], multipliers)
    }

    pub fn n_rooms(&self) -> usize {
        self.rooms.len()
    }

    /// Effective (perturbed) parameters.
    pub fn rooms(&self) -> &[RoomParams] {
        &self.rooms
    }

    pub fn room(&self, j: usize) -> &RoomParams {
        &self.rooms[j]
    }

    pub fn multipliers(&self) -> &[Multipliers] {
        &self.multipliers
    }

    pub fn nominal(&self) -> &[RoomParams] {
        &self.nominal
    }
}
