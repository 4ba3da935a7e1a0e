use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest nonzero modulation degree the heat pump can run at.
pub const MIN_MODULATION: f64 = 0.2;

/// One row of the manufacturer table: COP and maximum electric power at a
/// given ambient temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub ambient_c: f64,
    pub cop: f64,
    pub max_power_w: f64,
}

/// Air-source heat pump performance as a function of ambient temperature.
///
/// Values between breakpoints are linearly interpolated; outside the table
/// the nearest endpoint value is held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Breakpoint>", into = "Vec<Breakpoint>")]
pub struct HeatPumpCurve {
    breakpoints: Vec<Breakpoint>,
}

/// Supply temperature the reference table was taken at (documentation only).
pub const SUPPLY_TEMPERATURE_C: f64 = 55.0;

const REFERENCE_TABLE: [(f64, f64, f64); 8] = [
    (-10.0, 1.98, 4200.0),
    (-7.0, 2.20, 4390.0),
    (2.0, 2.71, 4830.0),
    (7.0, 3.10, 4620.0),
    (10.0, 3.34, 4400.0),
    (12.0, 3.55, 4410.0),
    (15.0, 3.89, 4000.0),
    (20.0, 4.26, 3320.0),
];

impl HeatPumpCurve {
    pub fn new(breakpoints: Vec<Breakpoint>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::config("heat pump curve has no breakpoints"));
        }
        for w in breakpoints.windows(2) {
            if !(w[0].ambient_c < w[1].ambient_c) {
                return Err(Error::config(format!(
                    "heat pump breakpoints must be strictly ascending in ambient temperature ({} then {})",
                    w[0].ambient_c, w[1].ambient_c
                )));
            }
        }
        for b in &breakpoints {
            if !(b.cop > 0.0 && b.max_power_w > 0.0 && b.cop.is_finite() && b.max_power_w.is_finite()) {
                return Err(Error::config(format!(
                    "heat pump breakpoint at {} °C needs positive COP and power",
                    b.ambient_c
                )));
            }
        }
        Ok(Self { breakpoints })
    }

    /// The 55 °C supply-temperature table of the reference air-source unit.
    pub fn reference() -> Self {
        let breakpoints = REFERENCE_TABLE
            .iter()
            .map(|&(ambient_c, cop, max_power_w)| Breakpoint {
                ambient_c,
                cop,
                max_power_w,
            })
            .collect();
        Self { breakpoints }
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn cop(&self, ambient_c: f64) -> f64 {
        self.interpolate(ambient_c, |b| b.cop)
    }

    pub fn max_power(&self, ambient_c: f64) -> f64 {
        self.interpolate(ambient_c, |b| b.max_power_w)
    }

    /// Largest heat flow the unit can deliver, W.
    pub fn max_heat(&self, ambient_c: f64) -> f64 {
        self.max_power(ambient_c) * self.cop(ambient_c)
    }

    fn interpolate(&self, x: f64, value: impl Fn(&Breakpoint) -> f64) -> f64 {
        let bp = &self.breakpoints;
        let first = &bp[0];
        let last = &bp[bp.len() - 1];
        if x <= first.ambient_c {
            return value(first);
        }
        if x >= last.ambient_c {
            return value(last);
        }
        // first index whose temperature exceeds x; 1 <= hi < len here
        let hi = bp.partition_point(|b| b.ambient_c <= x);
        let (a, b) = (&bp[hi - 1], &bp[hi]);
        let t = (x - a.ambient_c) / (b.ambient_c - a.ambient_c);
        value(a) + t * (value(b) - value(a))
    }
}

impl Default for HeatPumpCurve {
    fn default() -> Self {
        Self::reference()
    }
}

impl TryFrom<Vec<Breakpoint>> for HeatPumpCurve {
    type Error = Error;

    fn try_from(v: Vec<Breakpoint>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<HeatPumpCurve> for Vec<Breakpoint> {
    fn from(c: HeatPumpCurve) -> Self {
        c.breakpoints
    }
}

/// Electric power needed to deliver `heat_w` at coefficient of performance `cop`.
pub fn heat_to_power(heat_w: f64, cop: f64) -> Result<f64> {
    if !(cop > 0.0) {
        return Err(Error::contract(format!("COP must be positive, got {cop}")));
    }
    if !(heat_w >= 0.0) {
        return Err(Error::contract(format!("heat flow must be non-negative, got {heat_w}")));
    }
    Ok(heat_w.abs() / cop)
}

/// Electric power at modulation degree `modulation`.
///
/// The degree must already be feasible (zero or within [0.2, 1]).
pub fn modulation_to_power(modulation: f64, max_power_w: f64) -> Result<f64> {
    if !is_feasible_modulation(modulation) {
        return Err(Error::contract(format!(
            "modulation degree {modulation} is not in {{0}} ∪ [0.2, 1]"
        )));
    }
    Ok(modulation * max_power_w)
}

pub fn is_feasible_modulation(m: f64) -> bool {
    m == 0.0 || (MIN_MODULATION..=1.0).contains(&m)
}

/// Snaps a raw degree in [0, 1] onto `{0} ∪ [0.2, 1]`.
///
/// Values below `threshold` go to zero, values in `[threshold, 0.2)` go to
/// 0.2. Input is clamped to [0, 1] first.
pub fn round_modulation(raw: f64, threshold: f64) -> f64 {
    let raw = raw.clamp(0.0, 1.0);
    if raw >= MIN_MODULATION {
        raw
    } else if raw >= threshold && raw > 0.0 {
        MIN_MODULATION
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn cop_examples() {
        let c = HeatPumpCurve::reference();
        assert!(close(c.cop(-10.0), 1.98));
        assert!(close(c.cop(-8.5), 2.09));
        assert!(close(c.cop(25.0), 4.26));
    }

    #[test]
    fn max_power_examples() {
        let c = HeatPumpCurve::reference();
        assert!(close(c.max_power(2.0), 4830.0));
        assert!(close(c.max_power(-8.5), 4295.0));
        assert!(close(c.max_power(-20.0), 4200.0));
        assert!(close(c.max_power(7.0), 4620.0));
    }

    #[test]
    fn interpolation_hits_every_breakpoint() {
        let c = HeatPumpCurve::reference();
        for &(t, cop, p) in &REFERENCE_TABLE {
            assert_eq!(c.cop(t), cop);
            assert_eq!(c.max_power(t), p);
        }
    }

    #[test]
    fn heat_to_power_examples() {
        assert_eq!(heat_to_power(0.0, 2.0).unwrap(), 0.0);
        assert!(close(heat_to_power(3100.0, 3.10).unwrap(), 1000.0));
        let c = HeatPumpCurve::reference();
        let q = 4200.0 * 1.98;
        assert!(close(heat_to_power(q, c.cop(-10.0)).unwrap(), c.max_power(-10.0)));
        assert!(heat_to_power(100.0, 0.0).is_err());
        assert!(heat_to_power(-1.0, 2.0).is_err());
    }

    #[test]
    fn modulation_to_power_examples() {
        let c = HeatPumpCurve::reference();
        assert_eq!(modulation_to_power(0.0, 4400.0).unwrap(), 0.0);
        assert_eq!(modulation_to_power(1.0, c.max_power(7.0)).unwrap(), 4620.0);
        assert_eq!(modulation_to_power(0.5, 4400.0).unwrap(), 2200.0);
        assert!(modulation_to_power(0.1, 4400.0).is_err());
        assert!(modulation_to_power(1.2, 4400.0).is_err());
        assert!(modulation_to_power(-0.1, 4400.0).is_err());
    }

    #[test]
    fn rounding_rule() {
        assert_eq!(round_modulation(0.3, 0.1), 0.3);
        assert_eq!(round_modulation(0.15, 0.1), 0.2);
        assert_eq!(round_modulation(0.1, 0.1), 0.2);
        assert_eq!(round_modulation(0.099, 0.1), 0.0);
        assert_eq!(round_modulation(0.0, 0.0), 0.0);
        assert_eq!(round_modulation(1.3, 0.1), 1.0);
    }

    #[test]
    fn curve_validation() {
        assert!(HeatPumpCurve::new(vec![]).is_err());
        let b = |t: f64| Breakpoint {
            ambient_c: t,
            cop: 2.0,
            max_power_w: 1000.0,
        };
        assert!(HeatPumpCurve::new(vec![b(1.0), b(1.0)]).is_err());
        let single = HeatPumpCurve::new(vec![b(0.0)]).unwrap();
        assert_eq!(single.cop(-30.0), 2.0);
        assert_eq!(single.cop(30.0), 2.0);
    }

    #[test]
    fn max_heat_matches_power_times_cop() {
        let c = HeatPumpCurve::reference();
        for t in [-12.0, -3.3, 0.0, 7.0, 18.2, 30.0] {
            let full = modulation_to_power(1.0, c.max_power(t)).unwrap() * c.cop(t);
            assert!(close(full, c.max_heat(t)));
        }
    }
}
