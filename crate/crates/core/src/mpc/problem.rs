use nalgebra::{Matrix2, Vector2};

use super::MpcConfig;
use crate::comfort::BoundsSchedule;
use crate::error::{Error, Result};
use crate::model::{BuildingState, DiscreteDynamics, ExogenousSample, HeatPumpCurve};

const W_PER_KW: f64 = 1000.0;

/// Finite-horizon heating program from one measured state.
///
/// Heat flows are in kW inside the program. Index `k * n + j` addresses room
/// `j` in slot `k`; the comfort band of slot `k` applies to the temperature
/// reached at its end.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonProblem {
    pub n_rooms: usize,
    pub horizon: usize,
    pub a: Vec<Matrix2<f64>>,
    /// Response to 1 kW of heat over one slot.
    pub b: Vec<Vector2<f64>>,
    /// Free response from a zero state under the slot's weather.
    pub offset: Vec<Vector2<f64>>,
    pub x0: Vec<Vector2<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Deliverable heat per slot, kW.
    pub heat_max_kw: Vec<f64>,
    /// Cost of 1 kW of heat held over one slot, EUR.
    pub heat_price: Vec<f64>,
    /// EUR per kW² of input change.
    pub rate_weight: f64,
    /// EUR per K of violation per room and slot.
    pub slack_penalty: f64,
    /// Input applied in the slot before the horizon, kW.
    pub u_prev_kw: Vec<f64>,
}

impl HorizonProblem {
    pub fn n_vars(&self) -> usize {
        self.n_rooms * self.horizon
    }

    /// States `(T_i, T_m)` at instants `0..=horizon`, index `k * n + j`.
    pub fn simulate(&self, u: &[f64]) -> Vec<Vector2<f64>> {
        let n = self.n_rooms;
        let mut x = Vec::with_capacity((self.horizon + 1) * n);
        x.extend_from_slice(&self.x0);
        for k in 0..self.horizon {
            for j in 0..n {
                let i = k * n + j;
                let next = self.a[j] * x[i] + self.b[j] * u[i] + self.offset[i];
                x.push(next);
            }
        }
        x
    }

    /// Largest one-sided bound violation of each room and slot for input `u`.
    pub fn violations(&self, u: &[f64]) -> Vec<f64> {
        let x = self.simulate(u);
        let n = self.n_rooms;
        (0..self.n_vars())
            .map(|i| {
                let t = x[i + n][0];
                (self.lower[i] - t).max(t - self.upper[i]).max(0.0)
            })
            .collect()
    }

    pub fn objective(&self, u: &[f64], s: &[f64]) -> f64 {
        let n = self.n_rooms;
        let mut f = 0.0;
        for k in 0..self.horizon {
            for j in 0..n {
                let i = k * n + j;
                let prev = if k == 0 { self.u_prev_kw[j] } else { u[i - n] };
                let du = u[i] - prev;
                f += self.heat_price[k] * u[i] + self.rate_weight * du * du + self.slack_penalty * s[i];
            }
        }
        f
    }

    /// Energy part of the objective only, EUR.
    pub fn energy_cost(&self, u: &[f64]) -> f64 {
        let n = self.n_rooms;
        (0..self.horizon)
            .map(|k| self.heat_price[k] * u[k * n..(k + 1) * n].iter().sum::<f64>())
            .sum()
    }
}

/// Assembles the program for the slots `0..forecast.len()`.
///
/// `bounds` holds the comfort band at instants `0..=forecast.len()`; entry 0
/// (the current instant) is not used by the program.
pub fn build_problem(
    state: &BuildingState,
    dynamics: &DiscreteDynamics,
    forecast: &[ExogenousSample],
    bounds: &BoundsSchedule,
    curve: &HeatPumpCurve,
    cfg: &MpcConfig,
    u_prev_w: &[f64],
) -> Result<HorizonProblem> {
    cfg.validate()?;
    let horizon = cfg.horizon_steps(dynamics.dt())?;
    assemble(state, dynamics, forecast, bounds, curve, cfg, u_prev_w, horizon)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble(
    state: &BuildingState,
    dynamics: &DiscreteDynamics,
    forecast: &[ExogenousSample],
    bounds: &BoundsSchedule,
    curve: &HeatPumpCurve,
    cfg: &MpcConfig,
    u_prev_w: &[f64],
    horizon: usize,
) -> Result<HorizonProblem> {
    let n = dynamics.n_rooms();
    if horizon == 0 {
        return Err(Error::config("horizon must cover at least one step"));
    }
    if forecast.len() < horizon {
        return Err(Error::config(format!(
            "forecast covers {} steps, horizon needs {horizon}",
            forecast.len()
        )));
    }
    if bounds.len() < horizon + 1 || bounds.n_rooms() != n {
        return Err(Error::config(format!(
            "bounds cover {} instants for {} rooms, horizon needs {} for {n}",
            bounds.len(),
            bounds.n_rooms(),
            horizon + 1
        )));
    }
    if u_prev_w.len() != n {
        return Err(Error::contract("previous input length differs from room count"));
    }
    state.validate(n)?;

    let dt = dynamics.dt();
    let blocks = dynamics.blocks();
    let a = blocks.iter().map(|b| b.a).collect();
    let b = blocks
        .iter()
        .map(|b| Vector2::new(b.b[(0, 0)], b.b[(1, 0)]) * W_PER_KW)
        .collect();
    let x0 = (0..n).map(|j| Vector2::new(state.air_c[j], state.mass_c[j])).collect();

    let mut offset = Vec::with_capacity(horizon * n);
    let mut lower = Vec::with_capacity(horizon * n);
    let mut upper = Vec::with_capacity(horizon * n);
    let mut heat_max_kw = Vec::with_capacity(horizon);
    let mut heat_price = Vec::with_capacity(horizon);
    let mut max_abs_price: f64 = 0.0;
    for (k, exo) in forecast.iter().take(horizon).enumerate() {
        for blk in blocks {
            let v = blk.b.fixed_view::<2, 2>(0, 1) * Vector2::new(exo.ambient_c, exo.solar_wm2);
            offset.push(v);
        }
        for j in 0..n {
            let (lb, ub) = bounds.get(k + 1, j);
            let margin = cfg.comfort_margin.min(0.25 * (ub - lb));
            lower.push(lb + margin);
            upper.push(ub - margin);
        }
        let cop = curve.cop(exo.ambient_c);
        heat_max_kw.push(curve.max_heat(exo.ambient_c) / W_PER_KW);
        // ct/kWh -> EUR per kWh of electricity, spread over one slot of heat
        heat_price.push(exo.price_ct_kwh / 100.0 * (dt / 3600.0) / cop);
        max_abs_price = max_abs_price.max(exo.price_ct_kwh.abs() / 100.0);
    }
    let slack_penalty = cfg
        .slack_penalty
        .unwrap_or_else(|| MpcConfig::DEFAULT_SLACK_FACTOR * max_abs_price.max(MpcConfig::SLACK_PRICE_FLOOR));

    Ok(HorizonProblem {
        n_rooms: n,
        horizon,
        a,
        b,
        offset,
        x0,
        lower,
        upper,
        heat_max_kw,
        heat_price,
        rate_weight: cfg.rate_weight * W_PER_KW * W_PER_KW,
        slack_penalty,
        u_prev_kw: u_prev_w.iter().map(|u| u / W_PER_KW).collect(),
    })
}
