//! Rule-based heating controllers sharing one heat pump.

mod ecdf;
mod hysteresis;
mod storage;

pub use ecdf::{ecdf_build, price_factor, PriceEcdf, HOURS_PER_DAY};
pub use hysteresis::{hysteresis_step, HysteresisState};
pub use storage::{deficits, distribute, pc_step, psc_modulation, psc_step, state_of_charge, storage_factor};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::HeatPumpCurve;

/// Default cut between rounding down to zero and up to minimum modulation.
pub const DEFAULT_ROUNDING_THRESHOLD: f64 = 0.1;

/// What a rule-based controller sees at step k.
#[derive(Debug, Clone, Copy)]
pub struct ControllerContext<'a> {
    /// Air temperatures measured at the end of the previous slot, °C.
    pub prev_air_c: &'a [f64],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    /// Price over the current slot, ct/kWh.
    pub price: f64,
    pub ambient_c: f64,
    pub curve: &'a HeatPumpCurve,
    pub dt: f64,
}

impl ControllerContext<'_> {
    pub fn n_rooms(&self) -> usize {
        self.prev_air_c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.prev_air_c.len();
        if n == 0 || self.lower.len() != n || self.upper.len() != n {
            return Err(Error::contract(format!(
                "context lengths disagree: {} temperatures, {} lower, {} upper",
                n,
                self.lower.len(),
                self.upper.len()
            )));
        }
        Ok(())
    }
}

/// Heat flows for one slot plus the pump operating point behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlAction {
    /// Per-room heat flow, W.
    pub heat_w: Vec<f64>,
    /// Modulation degree in `{0} ∪ [0.2, 1]`.
    pub modulation: f64,
    /// Electric power drawn, W.
    pub power_w: f64,
}

impl ControlAction {
    pub fn zero(n_rooms: usize) -> Self {
        Self {
            heat_w: vec![0.0; n_rooms],
            modulation: 0.0,
            power_w: 0.0,
        }
    }

    pub fn total_heat(&self) -> f64 {
        self.heat_w.iter().sum()
    }

    /// Runs the pump at `modulation` and splits its heat by `weights`.
    ///
    /// Zero weights everywhere give an equal split over all rooms.
    pub fn at_modulation(modulation: f64, weights: &[f64], ambient_c: f64, curve: &HeatPumpCurve) -> Result<Self> {
        let power_w = crate::model::modulation_to_power(modulation, curve.max_power(ambient_c))?;
        let heat = power_w * curve.cop(ambient_c);
        Ok(Self {
            heat_w: distribute(heat, weights),
            modulation,
            power_w,
        })
    }
}

/// Tunables shared by the price-based heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicConfig {
    pub rounding_threshold: f64,
    /// Withhold heat from rooms already at their upper bound (price-only rule).
    pub pc_upper_cutoff: bool,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            rounding_threshold: DEFAULT_ROUNDING_THRESHOLD,
            pc_upper_cutoff: true,
        }
    }
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=crate::model::MIN_MODULATION).contains(&self.rounding_threshold) {
            return Err(Error::config(format!(
                "rounding_threshold must lie in [0, 0.2], got {}",
                self.rounding_threshold
            )));
        }
        Ok(())
    }
}
