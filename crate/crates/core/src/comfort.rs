//! Comfort levels, daily room schedules and bound violations.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const MINUTES_PER_DAY: u32 = 24 * 60;

/// Thermal satisfaction level of a room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OtsLevel {
    #[serde(alias = "i", alias = "1")]
    I,
    #[serde(alias = "ii", alias = "2")]
    II,
    #[serde(alias = "iii", alias = "3")]
    III,
    #[serde(rename = "off", alias = "Off", alias = "OFF")]
    Off,
}

impl OtsLevel {
    pub const ALL: [OtsLevel; 4] = [OtsLevel::I, OtsLevel::II, OtsLevel::III, OtsLevel::Off];

    /// Permitted air temperature band `(lower, upper)` in °C.
    pub const fn bounds(self) -> (f64, f64) {
        match self {
            OtsLevel::I => (22.6, 24.0),
            OtsLevel::II => (21.5, 25.0),
            OtsLevel::III => (20.7, 25.8),
            OtsLevel::Off => (16.0, 30.0),
        }
    }
}

/// Minute of day in `[0, 1440]`, written as `HH:MM` (with `24:00` allowed as an end).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DayMinute(pub u32);

impl DayMinute {
    pub fn hm(hour: u32, minute: u32) -> Self {
        DayMinute(hour * 60 + minute)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("invalid time of day `{s}`, expected HH:MM"));
        let (h, m) = s.split_once(':').ok_or_else(bad)?;
        let h: u32 = h.trim().parse().map_err(|_| bad())?;
        let m: u32 = m.trim().parse().map_err(|_| bad())?;
        if m >= 60 || h * 60 + m > MINUTES_PER_DAY {
            return Err(bad());
        }
        Ok(DayMinute(h * 60 + m))
    }
}

impl std::fmt::Display for DayMinute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl Serialize for DayMinute {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DayMinute {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        DayMinute::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// One daily period `[start, end)` at a given level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub start: DayMinute,
    pub end: DayMinute,
    pub level: OtsLevel,
}

impl Period {
    pub fn new(start: DayMinute, end: DayMinute, level: OtsLevel) -> Self {
        Self { start, end, level }
    }

    fn contains(&self, minute: u32) -> bool {
        self.start.0 <= minute && minute < self.end.0
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoomSchedule {
    #[serde(default)]
    pub periods: Vec<Period>,
}

/// Daily level plan per room. Times not covered by a period fall back to `Off`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSchedule {
    pub rooms: Vec<RoomSchedule>,
}

impl ModeSchedule {
    pub fn new(rooms: Vec<RoomSchedule>) -> Result<Self> {
        let s = Self { rooms };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rooms.is_empty() {
            return Err(Error::config("schedule lists no rooms"));
        }
        for (j, room) in self.rooms.iter().enumerate() {
            let mut sorted = room.periods.clone();
            sorted.sort_by_key(|p| p.start);
            for p in &sorted {
                if p.start >= p.end {
                    return Err(Error::config(format!(
                        "room {}: period {}-{} is empty or reversed",
                        j + 1,
                        p.start,
                        p.end
                    )));
                }
            }
            for w in sorted.windows(2) {
                if w[1].start < w[0].end {
                    return Err(Error::config(format!(
                        "room {}: periods {}-{} and {}-{} overlap",
                        j + 1,
                        w[0].start,
                        w[0].end,
                        w[1].start,
                        w[1].end
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: ModeSchedule = toml::from_str(text).map_err(|e| Error::config(format!("schedule: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn n_rooms(&self) -> usize {
        self.rooms.len()
    }

    pub fn level_at(&self, room: usize, minute_of_day: u32) -> OtsLevel {
        let minute = minute_of_day % MINUTES_PER_DAY;
        self.rooms[room]
            .periods
            .iter()
            .find(|p| p.contains(minute))
            .map_or(OtsLevel::Off, |p| p.level)
    }

    /// Level I from 08:00 to 17:00 in each of `n_rooms` rooms.
    pub fn base(n_rooms: usize) -> Self {
        let day = RoomSchedule {
            periods: vec![Period::new(DayMinute::hm(8, 0), DayMinute::hm(17, 0), OtsLevel::I)],
        };
        Self {
            rooms: vec![day; n_rooms],
        }
    }

    /// Five-room plan with a lunch break from 12:00 to 13:00.
    pub fn adaptive() -> Self {
        use OtsLevel::{I, III};
        let plan = [
            [I, III, I],
            [I, III, III],
            [III, III, III],
            [III, I, III],
            [III, III, III],
        ];
        let edges = [
            DayMinute::hm(8, 0),
            DayMinute::hm(12, 0),
            DayMinute::hm(13, 0),
            DayMinute::hm(17, 0),
        ];
        let rooms = plan
            .iter()
            .map(|levels| RoomSchedule {
                periods: levels
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| Period::new(edges[i], edges[i + 1], l))
                    .collect(),
            })
            .collect();
        Self { rooms }
    }
}

/// Per-step, per-room comfort band over a simulation horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsSchedule {
    n_rooms: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoundsSchedule {
    /// Samples `schedule` at `steps` instants, the first at `start_minute` past midnight.
    pub fn from_schedule(schedule: &ModeSchedule, start_minute: u32, steps: usize, dt: f64) -> Result<Self> {
        schedule.validate()?;
        if !(dt > 0.0) || dt % 60.0 != 0.0 {
            return Err(Error::config(format!(
                "time step must be a whole number of minutes, got {dt} s"
            )));
        }
        let dt_min = (dt / 60.0) as u64;
        let n = schedule.n_rooms();
        let mut lower = Vec::with_capacity(steps * n);
        let mut upper = Vec::with_capacity(steps * n);
        for k in 0..steps as u64 {
            let minute = ((start_minute as u64 + k * dt_min) % MINUTES_PER_DAY as u64) as u32;
            for j in 0..n {
                let (lb, ub) = schedule.level_at(j, minute).bounds();
                lower.push(lb);
                upper.push(ub);
            }
        }
        Ok(Self {
            n_rooms: n,
            lower,
            upper,
        })
    }

    /// Bands given directly, instant-major: index `k * n_rooms + room`.
    pub fn from_values(n_rooms: usize, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if n_rooms == 0 || lower.len() != upper.len() || !lower.len().is_multiple_of(n_rooms) {
            return Err(Error::config(format!(
                "bounds of lengths {} and {} do not tile {n_rooms} rooms",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::config(format!(
                "lower bound {} not below upper bound {} at index {i}",
                lower[i], upper[i]
            )));
        }
        Ok(Self { n_rooms, lower, upper })
    }

    pub fn n_rooms(&self) -> usize {
        self.n_rooms
    }

    pub fn len(&self) -> usize {
        self.lower.len() / self.n_rooms
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self, k: usize) -> &[f64] {
        &self.lower[k * self.n_rooms..(k + 1) * self.n_rooms]
    }

    pub fn upper(&self, k: usize) -> &[f64] {
        &self.upper[k * self.n_rooms..(k + 1) * self.n_rooms]
    }

    pub fn get(&self, k: usize, room: usize) -> (f64, f64) {
        let i = k * self.n_rooms + room;
        (self.lower[i], self.upper[i])
    }

    /// Sub-schedule covering steps `[from, from + len)`.
    pub fn window(&self, from: usize, len: usize) -> BoundsSchedule {
        let r = from * self.n_rooms..(from + len) * self.n_rooms;
        BoundsSchedule {
            n_rooms: self.n_rooms,
            lower: self.lower[r.clone()].to_vec(),
            upper: self.upper[r].to_vec(),
        }
    }
}

/// Base scenario, assuming the horizon starts at midnight.
pub fn build_base_scenario(n_rooms: usize, horizon_steps: usize, dt: f64) -> Result<BoundsSchedule> {
    if n_rooms == 0 {
        return Err(Error::config("base scenario needs at least one room"));
    }
    BoundsSchedule::from_schedule(&ModeSchedule::base(n_rooms), 0, horizon_steps, dt)
}

/// Adaptive five-room scenario, assuming the horizon starts at midnight.
pub fn build_adaptive_scenario(n_rooms: usize, horizon_steps: usize, dt: f64) -> Result<BoundsSchedule> {
    if n_rooms != 5 {
        return Err(Error::config(format!(
            "adaptive scenario is defined for exactly 5 rooms, got {n_rooms}"
        )));
    }
    BoundsSchedule::from_schedule(&ModeSchedule::adaptive(), 0, horizon_steps, dt)
}

/// Distance of `t` outside `[lower, upper]`, K.
pub fn violation(t: f64, lower: f64, upper: f64) -> f64 {
    (lower - t).max(0.0) + (t - upper).max(0.0)
}

/// Shortfall below the lower bound only, K.
pub fn lower_violation(t: f64, lower: f64) -> f64 {
    (lower - t).max(0.0)
}
