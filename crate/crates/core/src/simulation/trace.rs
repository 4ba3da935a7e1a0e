use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::config::ControllerKind;
use crate::data::{format_timestamp, write_csv, STEPS_PER_WEEK};
use crate::error::{Error, Result};
use crate::mpc::{MpcStepInfo, SolveStatus};

/// Steps per KPI week.
pub const STEPS_PER_KPI_WEEK: usize = STEPS_PER_WEEK;

/// Planned modulation below this counts as "off" in the solver statistics.
const PLANNED_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub timestamp: NaiveDateTime,
    pub air_c: Vec<f64>,
    pub mass_c: Vec<f64>,
    pub heat_w: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub violation: Vec<f64>,
    pub lower_violation: Vec<f64>,
    pub modulation: f64,
    pub power_w: f64,
    pub price_ct_kwh: f64,
    pub ambient_c: f64,
    pub solar_wm2: f64,
    pub cost_eur: f64,
    pub energy_kwh: f64,
    pub mpc: Option<MpcStepInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub controller: ControllerKind,
    pub n_rooms: usize,
    pub dt: f64,
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyResult {
    pub week: usize,
    pub cost_eur: f64,
    /// Mean over steps of the summed two-sided room violations, K.
    pub discomfort_k: f64,
    /// Same with shortfalls below the lower bound only, K.
    pub lower_discomfort_k: f64,
    pub room_violation_k: Vec<f64>,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcStats {
    pub solves: usize,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub capped_solves: usize,
    pub max_slack_sum: f64,
    /// Steps whose planned first input was clearly nonzero but below
    /// minimum modulation.
    pub projected_steps: usize,
}

impl Trace {
    pub fn weeks(&self) -> usize {
        self.records.len() / STEPS_PER_KPI_WEEK
    }

    fn week_records(&self, week: usize) -> Result<&[TraceRecord]> {
        let from = week * STEPS_PER_KPI_WEEK;
        let to = from + STEPS_PER_KPI_WEEK;
        if to > self.records.len() {
            return Err(Error::contract(format!(
                "week {week} is not fully covered by a trace of {} steps",
                self.records.len()
            )));
        }
        Ok(&self.records[from..to])
    }

    pub fn total_cost(&self) -> f64 {
        self.records.iter().map(|r| r.cost_eur).sum()
    }

    pub fn mpc_stats(&self) -> Option<MpcStats> {
        let infos: Vec<&MpcStepInfo> = self.records.iter().filter_map(|r| r.mpc.as_ref()).collect();
        if infos.is_empty() {
            return None;
        }
        Some(MpcStats {
            solves: infos.len(),
            mean_iterations: infos.iter().map(|i| i.iterations as f64).sum::<f64>() / infos.len() as f64,
            max_iterations: infos.iter().map(|i| i.iterations).max().unwrap_or(0),
            capped_solves: infos.iter().filter(|i| i.status == SolveStatus::MaxIterations).count(),
            max_slack_sum: infos.iter().map(|i| i.slack_sum).fold(0.0, f64::max),
            projected_steps: infos
                .iter()
                .filter(|i| i.raw_modulation > PLANNED_FLOOR && i.raw_modulation < crate::model::MIN_MODULATION)
                .count(),
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let n = self.n_rooms;
        let mut header: Vec<String> = ["step", "timestamp"].iter().map(|s| s.to_string()).collect();
        for field in [
            "air_c",
            "mass_c",
            "heat_w",
            "lower_c",
            "upper_c",
            "violation_k",
            "lower_violation_k",
        ] {
            for j in 1..=n {
                header.push(format!("room{j}_{field}"));
            }
        }
        for h in [
            "modulation",
            "power_w",
            "price_ct_kwh",
            "ambient_c",
            "solar_wm2",
            "cost_eur",
            "energy_kwh",
            "mpc_iterations",
            "mpc_status",
            "mpc_slack_sum",
            "mpc_raw_modulation",
        ] {
            header.push(h.to_string());
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(path.as_ref(), &header, self.records.len(), |i, row| {
            let r = &self.records[i];
            row.push(r.step.to_string());
            row.push(format_timestamp(r.timestamp));
            for v in [
                &r.air_c,
                &r.mass_c,
                &r.heat_w,
                &r.lower,
                &r.upper,
                &r.violation,
                &r.lower_violation,
            ] {
                row.extend(v.iter().map(f64::to_string));
            }
            for v in [
                r.modulation,
                r.power_w,
                r.price_ct_kwh,
                r.ambient_c,
                r.solar_wm2,
                r.cost_eur,
                r.energy_kwh,
            ] {
                row.push(v.to_string());
            }
            match &r.mpc {
                Some(m) => {
                    row.push(m.iterations.to_string());
                    row.push(m.status.name().to_string());
                    row.push(m.slack_sum.to_string());
                    row.push(m.raw_modulation.to_string());
                }
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
        })
    }
}

/// Electricity cost of one week, EUR.
pub fn kpi_costs(trace: &Trace, week: usize) -> Result<f64> {
    Ok(trace.week_records(week)?.iter().map(|r| r.cost_eur).sum())
}

/// Mean summed room violation over the week's steps, K.
pub fn kpi_discomfort(trace: &Trace, week: usize) -> Result<f64> {
    let recs = trace.week_records(week)?;
    let total: f64 = recs.iter().map(|r| r.violation.iter().sum::<f64>()).sum();
    Ok(total / STEPS_PER_KPI_WEEK as f64)
}

pub fn weekly_results(trace: &Trace) -> Result<Vec<WeeklyResult>> {
    (0..trace.weeks())
        .map(|w| {
            let recs = trace.week_records(w)?;
            let mut room = vec![0.0; trace.n_rooms];
            for r in recs {
                for (acc, v) in room.iter_mut().zip(&r.violation) {
                    *acc += v;
                }
            }
            let lower: f64 = recs.iter().map(|r| r.lower_violation.iter().sum::<f64>()).sum();
            Ok(WeeklyResult {
                week: w + 1,
                cost_eur: kpi_costs(trace, w)?,
                discomfort_k: kpi_discomfort(trace, w)?,
                lower_discomfort_k: lower / STEPS_PER_KPI_WEEK as f64,
                room_violation_k: room,
                energy_kwh: recs.iter().map(|r| r.energy_kwh).sum(),
            })
        })
        .collect()
}
