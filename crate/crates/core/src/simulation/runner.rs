use crate::comfort::{lower_violation, violation, BoundsSchedule};
use crate::controllers::{
    ecdf_build, hysteresis_step, pc_step, psc_step, ControlAction, ControllerContext, HeuristicConfig, HysteresisState,
    PriceEcdf,
};
use crate::data::{AlignedSeries, STEPS_PER_DAY, STEPS_PER_WEEK};
use crate::error::{Error, Result};
use crate::model::{
    discretize, is_feasible_modulation, step, BuildingParams, BuildingState, DiscreteDynamics, ExogenousSample,
    HeatPumpCurve,
};
use crate::mpc::{MpcConfig, MpcController, MpcStepInfo};

use super::config::{ControllerKind, RunConfig};
use super::trace::{Trace, TraceRecord};

const ENERGY_TOLERANCE: f64 = 1e-6;

/// What a controller may look at before acting on slot `k`.
pub struct Observation<'a> {
    /// Step index within the current closed loop.
    pub k: usize,
    /// State measured at the start of the slot.
    pub state: &'a BuildingState,
    /// Exogenous data from the current slot to the end of the loop.
    pub forecast: &'a [ExogenousSample],
    /// Bounds at instants `k, k + 1, ...`.
    pub bounds: &'a BoundsSchedule,
    pub ecdf: &'a PriceEcdf,
    pub dynamics: &'a DiscreteDynamics,
    pub curve: &'a HeatPumpCurve,
}

impl Observation<'_> {
    pub fn context(&self) -> ControllerContext<'_> {
        ControllerContext {
            prev_air_c: &self.state.air_c,
            lower: self.bounds.lower(self.k),
            upper: self.bounds.upper(self.k),
            price: self.forecast[0].price_ct_kwh,
            ambient_c: self.forecast[0].ambient_c,
            curve: self.curve,
            dt: self.dynamics.dt(),
        }
    }
}

pub trait Controller: Send {
    fn kind(&self) -> ControllerKind;
    fn reset(&mut self);
    fn act(&mut self, obs: &Observation<'_>) -> Result<(ControlAction, Option<MpcStepInfo>)>;
}

pub struct Hysteresis {
    state: HysteresisState,
}

impl Hysteresis {
    pub fn new(n_rooms: usize) -> Self {
        Self {
            state: HysteresisState::new(n_rooms),
        }
    }
}

impl Controller for Hysteresis {
    fn kind(&self) -> ControllerKind {
        ControllerKind::Hysteresis
    }

    fn reset(&mut self) {
        self.state = HysteresisState::new(self.state.heating.len());
    }

    fn act(&mut self, obs: &Observation<'_>) -> Result<(ControlAction, Option<MpcStepInfo>)> {
        let (next, action) = hysteresis_step(&self.state, &obs.context())?;
        self.state = next;
        Ok((action, None))
    }
}

pub struct PriceOnly(pub HeuristicConfig);

impl Controller for PriceOnly {
    fn kind(&self) -> ControllerKind {
        ControllerKind::Pc
    }

    fn reset(&mut self) {}

    fn act(&mut self, obs: &Observation<'_>) -> Result<(ControlAction, Option<MpcStepInfo>)> {
        Ok((pc_step(&obs.context(), obs.ecdf, &self.0)?, None))
    }
}

pub struct PriceStorage(pub HeuristicConfig);

impl Controller for PriceStorage {
    fn kind(&self) -> ControllerKind {
        ControllerKind::Psc
    }

    fn reset(&mut self) {}

    fn act(&mut self, obs: &Observation<'_>) -> Result<(ControlAction, Option<MpcStepInfo>)> {
        Ok((psc_step(&obs.context(), obs.ecdf, &self.0)?, None))
    }
}

pub struct Mpc(pub MpcController);

impl Controller for Mpc {
    fn kind(&self) -> ControllerKind {
        ControllerKind::Mpc
    }

    fn reset(&mut self) {
        self.0.reset();
    }

    fn act(&mut self, obs: &Observation<'_>) -> Result<(ControlAction, Option<MpcStepInfo>)> {
        let horizon = self
            .0
            .config()
            .horizon_steps(obs.dynamics.dt())?
            .min(obs.forecast.len());
        let window = obs.bounds.window(obs.k, horizon + 1);
        let (action, info) = self
            .0
            .step(obs.state, obs.dynamics, &obs.forecast[..horizon], &window, obs.curve)?;
        Ok((action, Some(info)))
    }
}

pub fn make_controller(
    kind: ControllerKind,
    n_rooms: usize,
    heuristics: &HeuristicConfig,
    mpc: &MpcConfig,
) -> Result<Box<dyn Controller>> {
    heuristics.validate()?;
    Ok(match kind {
        ControllerKind::Hysteresis => Box::new(Hysteresis::new(n_rooms)),
        ControllerKind::Pc => Box::new(PriceOnly(*heuristics)),
        ControllerKind::Psc => Box::new(PriceStorage(*heuristics)),
        ControllerKind::Mpc => Box::new(Mpc(MpcController::new(*mpc, n_rooms)?)),
    })
}

/// Brings an action inside the pump envelope, logging when it had to.
fn enforce_envelope(mut a: ControlAction, exo: &ExogenousSample, curve: &HeatPumpCurve, k: usize) -> ControlAction {
    let max_heat = curve.max_heat(exo.ambient_c);
    let max_power = curve.max_power(exo.ambient_c);
    let negative = a.heat_w.iter().any(|&q| !(q >= 0.0));
    let total: f64 = a.heat_w.iter().map(|q| q.max(0.0)).sum();
    let over = total > max_heat * (1.0 + 1e-9) || a.power_w > max_power * (1.0 + 1e-9);
    if !(negative || over || !is_feasible_modulation(a.modulation)) {
        return a;
    }
    log::warn!(
        "step {k}: action outside the pump envelope (heat {total:.1} W of {max_heat:.1} W, modulation {:.4}); clamping",
        a.modulation
    );
    for q in &mut a.heat_w {
        *q = q.max(0.0);
    }
    let m = crate::model::round_modulation(total / max_heat, 0.1);
    let factor = if total > 0.0 { m * max_heat / total } else { 0.0 };
    for q in &mut a.heat_w {
        *q *= factor;
    }
    a.modulation = m;
    a.power_w = m * max_power;
    a
}

fn check_energy(a: &ControlAction, exo: &ExogenousSample, curve: &HeatPumpCurve, k: usize) -> Result<()> {
    let heat = a.total_heat();
    let expected = a.power_w * curve.cop(exo.ambient_c);
    if (heat - expected).abs() > ENERGY_TOLERANCE * expected.abs().max(1.0) {
        return Err(Error::contract(format!(
            "step {k}: heat {heat} W inconsistent with power {} W",
            a.power_w
        )));
    }
    Ok(())
}

/// One uninterrupted closed loop over `exo`, recording steps from `record_from` on.
#[allow(clippy::too_many_arguments)]
fn run_segment(
    controller: &mut dyn Controller,
    dynamics: &DiscreteDynamics,
    curve: &HeatPumpCurve,
    exo: &[ExogenousSample],
    bounds: &BoundsSchedule,
    initial: BuildingState,
    record_from: usize,
    data: &AlignedSeries,
    data_offset: usize,
    out: &mut Vec<TraceRecord>,
) -> Result<()> {
    let n = dynamics.n_rooms();
    let dt_h = dynamics.dt() / 3600.0;
    let mut state = initial;
    let mut ecdf: Option<PriceEcdf> = None;
    controller.reset();
    for k in 0..exo.len() {
        if k % STEPS_PER_DAY == 0 {
            let day: Vec<f64> = (0..24).map(|h| exo[k + h * 4].price_ct_kwh).collect();
            ecdf = Some(ecdf_build(&day)?);
        }
        let Some(ecdf_ref) = ecdf.as_ref() else {
            return Err(Error::contract("price distribution missing at loop start"));
        };
        state.validate(n)?;
        let obs = Observation {
            k,
            state: &state,
            forecast: &exo[k..],
            bounds,
            ecdf: ecdf_ref,
            dynamics,
            curve,
        };
        let (action, info) = controller.act(&obs)?;
        let sample = exo[k];
        let action = enforce_envelope(action, &sample, curve, k);
        check_energy(&action, &sample, curve, k)?;
        let next = step(dynamics, &state, &sample, &action.heat_w)?;
        if k >= record_from {
            let idx = data_offset + k - record_from;
            let lower = bounds.lower(k).to_vec();
            let upper = bounds.upper(k).to_vec();
            let viol = (0..n).map(|j| violation(state.air_c[j], lower[j], upper[j])).collect();
            let low = (0..n).map(|j| lower_violation(state.air_c[j], lower[j])).collect();
            let power_kw = action.power_w / 1000.0;
            out.push(TraceRecord {
                step: idx,
                timestamp: data.timestamp(idx),
                air_c: state.air_c.clone(),
                mass_c: state.mass_c.clone(),
                heat_w: action.heat_w,
                lower,
                upper,
                violation: viol,
                lower_violation: low,
                modulation: action.modulation,
                power_w: action.power_w,
                price_ct_kwh: sample.price_ct_kwh,
                ambient_c: sample.ambient_c,
                solar_wm2: sample.solar_wm2,
                cost_eur: sample.price_ct_kwh * power_kw * dt_h / 100.0,
                energy_kwh: power_kw * dt_h,
                mpc: info,
            });
        }
        state = BuildingState {
            step: state.step + 1,
            ..next
        };
    }
    Ok(())
}

/// Runs `controller` over `data` as configured by `cfg`.
///
/// Each loop starts from the uniform initial temperature and first replays
/// `warmup_hours` of its own opening days without recording them.
pub fn run_closed_loop(cfg: &RunConfig, data: &AlignedSeries, controller: &mut dyn Controller) -> Result<Trace> {
    cfg.validate()?;
    if data.start_minute() != 0 {
        return Err(Error::config("input data must start at midnight"));
    }
    let required = cfg.weeks * STEPS_PER_WEEK;
    if data.len() < required {
        return Err(crate::error::DataError::TooShort {
            available: data.len(),
            required,
        }
        .into());
    }
    let params: BuildingParams = cfg.building()?;
    let dynamics = discretize(&params, cfg.dt)?;
    let curve = HeatPumpCurve::reference();
    let warm = cfg.warmup_hours as usize * STEPS_PER_DAY / 24;
    let segments: Vec<(usize, usize)> = if cfg.reset_weekly {
        (0..cfg.weeks)
            .map(|w| (w * STEPS_PER_WEEK, (w + 1) * STEPS_PER_WEEK))
            .collect()
    } else {
        vec![(0, required)]
    };
    let mut records = Vec::with_capacity(required);
    for (from, to) in segments {
        let mut exo = Vec::with_capacity(warm + to - from);
        exo.extend_from_slice(&data.samples[from..from + warm]);
        exo.extend_from_slice(&data.samples[from..to]);
        let bounds = cfg.bounds(0, exo.len() + 1)?;
        let initial = BuildingState::uniform(cfg.rooms, cfg.initial_temperature_c);
        run_segment(
            controller,
            &dynamics,
            &curve,
            &exo,
            &bounds,
            initial,
            warm,
            data,
            from,
            &mut records,
        )?;
    }
    Ok(Trace {
        controller: controller.kind(),
        n_rooms: cfg.rooms,
        dt: cfg.dt,
        records,
    })
}

/// Builds the configured controller and runs it.
pub fn run(cfg: &RunConfig, data: &AlignedSeries) -> Result<Trace> {
    let mut c = make_controller(cfg.controller, cfg.rooms, &cfg.heuristics, &cfg.mpc)?;
    run_closed_loop(cfg, data, c.as_mut())
}
