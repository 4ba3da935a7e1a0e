//! Receding-horizon controller on the exact building model.

mod ipm;
mod problem;

pub use ipm::{solve, MpcSolution, SolveStatus, SolverOptions};
pub use problem::{build_problem, HorizonProblem};

use serde::{Deserialize, Serialize};

use crate::comfort::{violation, BoundsSchedule};
use crate::controllers::{ControlAction, DEFAULT_ROUNDING_THRESHOLD};
use crate::error::{Error, Result};
use crate::model::{
    round_modulation, step, BuildingState, DiscreteDynamics, ExogenousSample, HeatPumpCurve, MIN_MODULATION,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcConfig {
    pub horizon_hours: f64,
    /// Weight on squared input changes, EUR/W².
    pub rate_weight: f64,
    /// EUR per K of violation per room and step. Derived from prices when unset.
    pub slack_penalty: Option<f64>,
    pub kkt_tolerance: f64,
    pub max_iterations: usize,
    /// Tightening of every comfort band inside the program, K.
    pub comfort_margin: f64,
    pub rounding_threshold: f64,
}

impl MpcConfig {
    pub const DEFAULT_SLACK_FACTOR: f64 = 1e3;
    /// EUR/kWh used in place of the horizon's peak price when that is smaller.
    pub const SLACK_PRICE_FLOOR: f64 = 1e-3;

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon_hours > 0.0 && self.horizon_hours.is_finite()) {
            return Err(Error::config(format!(
                "horizon_hours must be positive, got {}",
                self.horizon_hours
            )));
        }
        if !(self.rate_weight >= 0.0 && self.rate_weight.is_finite()) {
            return Err(Error::config(format!(
                "rate_weight must be non-negative, got {}",
                self.rate_weight
            )));
        }
        if let Some(w) = self.slack_penalty {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::config(format!("slack_penalty must be positive, got {w}")));
            }
        }
        if !(self.kkt_tolerance > 0.0) {
            return Err(Error::config("kkt_tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be at least 1"));
        }
        if !(self.comfort_margin >= 0.0 && self.comfort_margin < 0.5) {
            return Err(Error::config(format!(
                "comfort_margin must lie in [0, 0.5) K, got {}",
                self.comfort_margin
            )));
        }
        if !(0.0..=MIN_MODULATION).contains(&self.rounding_threshold) {
            return Err(Error::config("rounding_threshold must lie in [0, 0.2]"));
        }
        Ok(())
    }

    pub fn horizon_steps(&self, dt: f64) -> Result<usize> {
        let steps = self.horizon_hours * 3600.0 / dt;
        let rounded = steps.round();
        if rounded < 1.0 || (steps - rounded).abs() > 1e-9 {
            return Err(Error::config(format!(
                "horizon of {} h is not a whole number of {dt} s steps",
                self.horizon_hours
            )));
        }
        Ok(rounded as usize)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.kkt_tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            horizon_hours: 16.0,
            rate_weight: 0.0,
            slack_penalty: None,
            kkt_tolerance: 1e-6,
            max_iterations: 100,
            comfort_margin: 0.01,
            rounding_threshold: DEFAULT_ROUNDING_THRESHOLD,
        }
    }
}

/// Solver statistics for one receding-horizon step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpcStepInfo {
    pub horizon: usize,
    pub iterations: usize,
    pub status: SolveStatus,
    pub objective: f64,
    pub slack_sum: f64,
    /// First-slot modulation before projection onto the feasible set.
    pub raw_modulation: f64,
}

/// Plans over the available horizon and returns the projected first input.
///
/// `forecast[0]` and `bounds` instant 0 belong to the current step; the
/// horizon shrinks when fewer steps remain.
#[allow(clippy::too_many_arguments)]
pub fn mpc_step(
    state: &BuildingState,
    dynamics: &DiscreteDynamics,
    forecast: &[ExogenousSample],
    bounds: &BoundsSchedule,
    curve: &HeatPumpCurve,
    cfg: &MpcConfig,
    u_prev_w: &[f64],
) -> Result<(ControlAction, MpcStepInfo)> {
    cfg.validate()?;
    let full = cfg.horizon_steps(dynamics.dt())?;
    let horizon = full.min(forecast.len()).min(bounds.len().saturating_sub(1));
    if horizon == 0 {
        return Err(Error::config("no forecast left for the receding horizon"));
    }
    let problem = problem::assemble(state, dynamics, forecast, bounds, curve, cfg, u_prev_w, horizon)?;
    let sol = solve(&problem, &cfg.solver_options());
    match sol.status {
        SolveStatus::InfeasibleNumerics => {
            return Err(Error::Solver(format!(
                "interior-point breakdown at step {} after {} iterations (residual {:.3e}, gap {:.3e})",
                state.step, sol.iterations, sol.dual_residual, sol.gap
            )))
        }
        SolveStatus::MaxIterations => log::warn!(
            "step {}: solver hit the iteration cap (residual {:.3e}, gap {:.3e}); using last iterate",
            state.step,
            sol.dual_residual,
            sol.gap
        ),
        SolveStatus::Optimal => {}
    }

    let n = dynamics.n_rooms();
    let exo = &forecast[0];
    let first: Vec<f64> = sol.heat_kw[..n].iter().map(|q| q * 1000.0).collect();
    let (action, raw) = project_first(&first, state, dynamics, exo, bounds, curve, cfg.rounding_threshold)?;
    let info = MpcStepInfo {
        horizon,
        iterations: sol.iterations,
        status: sol.status,
        objective: sol.objective,
        slack_sum: sol.slack_sum(),
        raw_modulation: raw,
    };
    Ok((action, info))
}

/// Maps planned heat flows onto an operating point the pump can hold.
///
/// Below minimum modulation the choice between switching off and running at
/// the minimum goes to whichever keeps the rooms closer to their band at the
/// end of the slot; ties fall back to the threshold rule.
fn project_first(
    planned_w: &[f64],
    state: &BuildingState,
    dynamics: &DiscreteDynamics,
    exo: &ExogenousSample,
    bounds: &BoundsSchedule,
    curve: &HeatPumpCurve,
    threshold: f64,
) -> Result<(ControlAction, f64)> {
    let n = planned_w.len();
    let max_heat = curve.max_heat(exo.ambient_c);
    let max_power = curve.max_power(exo.ambient_c);
    let total: f64 = planned_w.iter().sum();
    let raw = total / max_heat;

    let scaled = |m: f64| -> ControlAction {
        let factor = if total > 0.0 { m * max_heat / total } else { 0.0 };
        ControlAction {
            heat_w: planned_w.iter().map(|q| q * factor).collect(),
            modulation: m,
            power_w: m * max_power,
        }
    };
    if raw >= MIN_MODULATION {
        return Ok((scaled(raw.min(1.0)), raw));
    }
    if total <= 0.0 {
        return Ok((ControlAction::zero(n), raw));
    }
    let off = ControlAction::zero(n);
    let low = scaled(MIN_MODULATION);
    let end_violation = |a: &ControlAction| -> Result<f64> {
        let next = step(dynamics, state, exo, &a.heat_w)?;
        Ok((0..n)
            .map(|j| {
                let (lb, ub) = bounds.get(1, j);
                violation(next.air_c[j], lb, ub)
            })
            .sum())
    };
    let (v_off, v_low) = (end_violation(&off)?, end_violation(&low)?);
    let choice = if (v_off - v_low).abs() <= 1e-12 {
        if round_modulation(raw, threshold) > 0.0 {
            low
        } else {
            off
        }
    } else if v_low < v_off {
        low
    } else {
        off
    };
    Ok((choice, raw))
}

/// Receding-horizon controller carrying the previously applied input.
#[derive(Debug, Clone)]
pub struct MpcController {
    cfg: MpcConfig,
    u_prev_w: Vec<f64>,
}

impl MpcController {
    pub fn new(cfg: MpcConfig, n_rooms: usize) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            u_prev_w: vec![0.0; n_rooms],
        })
    }

    pub fn config(&self) -> &MpcConfig {
        &self.cfg
    }

    pub fn step(
        &mut self,
        state: &BuildingState,
        dynamics: &DiscreteDynamics,
        forecast: &[ExogenousSample],
        bounds: &BoundsSchedule,
        curve: &HeatPumpCurve,
    ) -> Result<(ControlAction, MpcStepInfo)> {
        let out = mpc_step(state, dynamics, forecast, bounds, curve, &self.cfg, &self.u_prev_w)?;
        self.u_prev_w.clone_from(&out.0.heat_w);
        Ok(out)
    }

    pub fn reset(&mut self) {
        self.u_prev_w.iter_mut().for_each(|u| *u = 0.0);
    }
}
