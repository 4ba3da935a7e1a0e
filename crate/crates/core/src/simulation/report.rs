use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ControllerKind, RunConfig, ScenarioKind};
use super::runner::run;
use super::trace::{weekly_results, MpcStats, Trace, WeeklyResult};
use crate::data::{format_timestamp, write_csv, AlignedSeries};
use crate::error::{Error, Result};
use crate::model::{Multipliers, ParameterSet};

/// Version of the summary and report layout.
pub const SCHEMA_VERSION: &str = "1.0.0";

pub const COST_UNIT_NOTE: &str = "cost_eur = sum_k price_ct_kwh * power_kw * dt_h / 100";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: String,
    pub controller: ControllerKind,
    pub scenario: ScenarioKind,
    pub parameter_set: ParameterSet,
    pub cost_unit: String,
    pub mean_cost_eur: f64,
    pub mean_discomfort_k: f64,
    pub mean_lower_discomfort_k: f64,
    pub total_cost_eur: f64,
    pub total_energy_kwh: f64,
    pub weeks: Vec<WeeklyResult>,
    pub mpc: Option<MpcStats>,
    pub multipliers: Vec<Multipliers>,
    pub config: RunConfig,
}

pub fn summarize(cfg: &RunConfig, trace: &Trace) -> Result<RunSummary> {
    let weeks = weekly_results(trace)?;
    let count = weeks.len().max(1) as f64;
    let mean = |f: fn(&WeeklyResult) -> f64| weeks.iter().map(f).sum::<f64>() / count;
    let frozen = cfg.frozen();
    Ok(RunSummary {
        schema_version: SCHEMA_VERSION.to_string(),
        controller: cfg.controller,
        scenario: cfg.scenario,
        parameter_set: cfg.parameter_set,
        cost_unit: COST_UNIT_NOTE.to_string(),
        mean_cost_eur: mean(|w| w.cost_eur),
        mean_discomfort_k: mean(|w| w.discomfort_k),
        mean_lower_discomfort_k: mean(|w| w.lower_discomfort_k),
        total_cost_eur: trace.total_cost(),
        total_energy_kwh: weeks.iter().map(|w| w.energy_kwh).sum(),
        mpc: trace.mpc_stats(),
        multipliers: frozen.frozen_multipliers(),
        weeks,
        config: frozen,
    })
}

impl RunSummary {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::contract(format!("summary serialization: {e}")))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

/// One point of the controller × scenario × parameter-set grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellSpec {
    pub controller: ControllerKind,
    pub scenario: ScenarioKind,
    pub parameter_set: ParameterSet,
}

impl CellSpec {
    pub fn apply(&self, base: &RunConfig) -> RunConfig {
        RunConfig {
            controller: self.controller,
            scenario: self.scenario,
            parameter_set: self.parameter_set,
            ..base.clone()
        }
    }

    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.controller, self.scenario, self.parameter_set)
    }
}

/// The full benchmark grid: four controllers, two scenarios, two parameter sets.
pub fn default_grid() -> Vec<CellSpec> {
    let mut cells = Vec::with_capacity(16);
    for parameter_set in ParameterSet::ALL {
        for scenario in ScenarioKind::BENCHMARK {
            for controller in ControllerKind::ALL {
                cells.push(CellSpec {
                    controller,
                    scenario,
                    parameter_set,
                });
            }
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub cell: CellSpec,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
    pub error_kind: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub cell: CellSpec,
    pub mean_cost_eur: f64,
    pub mean_discomfort_k: f64,
    /// Relative to hysteresis in the same scenario and parameter set, percent.
    pub cost_reduction_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: String,
    pub config: RunConfig,
    pub cells: Vec<CellOutcome>,
    pub comparisons: Vec<Comparison>,
}

impl CampaignReport {
    pub fn all_succeeded(&self) -> bool {
        self.cells.iter().all(|c| c.summary.is_some())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellOutcome> {
        self.cells.iter().filter(|c| c.summary.is_none())
    }

    pub fn summary(&self, cell: &CellSpec) -> Option<&RunSummary> {
        self.cells
            .iter()
            .find(|c| &c.cell == cell)
            .and_then(|c| c.summary.as_ref())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::contract(format!("report serialization: {e}")))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    /// One row per cell: mean weekly cost and discomfort.
    pub fn write_aggregate_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let header = [
            "controller",
            "scenario",
            "parameter_set",
            "status",
            "mean_cost_eur",
            "mean_discomfort_k",
            "mean_lower_discomfort_k",
            "cost_reduction_vs_hysteresis_pct",
        ];
        write_csv(path.as_ref(), &header, self.cells.len(), |i, row| {
            let c = &self.cells[i];
            row.extend([
                c.cell.controller.to_string(),
                c.cell.scenario.to_string(),
                c.cell.parameter_set.to_string(),
            ]);
            match &c.summary {
                Some(s) => {
                    row.push("ok".into());
                    row.push(s.mean_cost_eur.to_string());
                    row.push(s.mean_discomfort_k.to_string());
                    row.push(s.mean_lower_discomfort_k.to_string());
                    let red = self
                        .comparisons
                        .iter()
                        .find(|k| k.cell == c.cell)
                        .and_then(|k| k.cost_reduction_pct);
                    row.push(red.map(|r| r.to_string()).unwrap_or_default());
                }
                None => {
                    row.push(format!("failed:{}", c.error_kind.as_deref().unwrap_or("unknown")));
                    row.extend(std::iter::repeat_n(String::new(), 4));
                }
            }
        })
    }

    /// One row per cell and week.
    pub fn write_weekly_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let rows: Vec<(&CellSpec, &WeeklyResult)> = self
            .cells
            .iter()
            .filter_map(|c| c.summary.as_ref().map(|s| (&c.cell, s)))
            .flat_map(|(cell, s)| s.weeks.iter().map(move |w| (cell, w)))
            .collect();
        let header = [
            "controller",
            "scenario",
            "parameter_set",
            "week",
            "cost_eur",
            "discomfort_k",
            "lower_discomfort_k",
            "energy_kwh",
        ];
        write_csv(path.as_ref(), &header, rows.len(), |i, row| {
            let (cell, w) = rows[i];
            row.extend([
                cell.controller.to_string(),
                cell.scenario.to_string(),
                cell.parameter_set.to_string(),
                w.week.to_string(),
                w.cost_eur.to_string(),
                w.discomfort_k.to_string(),
                w.lower_discomfort_k.to_string(),
                w.energy_kwh.to_string(),
            ]);
        })
    }
}

fn comparisons(cells: &[CellOutcome]) -> Vec<Comparison> {
    cells
        .iter()
        .filter_map(|c| c.summary.as_ref().map(|s| (c.cell, s)))
        .map(|(cell, s)| {
            let reference = cells
                .iter()
                .find(|o| {
                    o.cell.controller == ControllerKind::Hysteresis
                        && o.cell.scenario == cell.scenario
                        && o.cell.parameter_set == cell.parameter_set
                })
                .and_then(|o| o.summary.as_ref());
            Comparison {
                cell,
                mean_cost_eur: s.mean_cost_eur,
                mean_discomfort_k: s.mean_discomfort_k,
                cost_reduction_pct: reference
                    .filter(|r| r.mean_cost_eur != 0.0)
                    .map(|r| 100.0 * (r.mean_cost_eur - s.mean_cost_eur) / r.mean_cost_eur),
            }
        })
        .collect()
}

fn run_cell(base: &RunConfig, cell: &CellSpec, data: &AlignedSeries) -> CellOutcome {
    let cfg = cell.apply(base);
    let result = cfg
        .validate()
        .and_then(|_| run(&cfg, data))
        .and_then(|t| summarize(&cfg, &t));
    match result {
        Ok(s) => CellOutcome {
            cell: *cell,
            summary: Some(s),
            error: None,
            error_kind: None,
        },
        Err(e) => {
            log::error!("cell {} failed: {e}", cell.label());
            CellOutcome {
                cell: *cell,
                summary: None,
                error_kind: Some(e.kind().to_string()),
                error: Some(e.to_string()),
            }
        }
    }
}

/// Runs every cell on the same data, up to `parallel` at a time.
///
/// A failing cell is recorded and does not stop the others.
pub fn compare_campaign(
    base: &RunConfig,
    cells: &[CellSpec],
    data: &AlignedSeries,
    parallel: usize,
) -> Result<CampaignReport> {
    let base = base.frozen();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<CellOutcome> = pool.install(|| cells.par_iter().map(|c| run_cell(&base, c, data)).collect());
    Ok(CampaignReport {
        schema_version: SCHEMA_VERSION.to_string(),
        comparisons: comparisons(&outcomes),
        cells: outcomes,
        config: base,
    })
}

/// Long-format trace: one row per step, room and variable.
pub fn write_tidy_trace(trace: &Trace, path: impl AsRef<Path>) -> Result<()> {
    const ROOM_VARS: [&str; 6] = ["air_c", "mass_c", "heat_w", "lower_c", "upper_c", "violation_k"];
    const PUMP_VARS: [&str; 5] = ["modulation", "power_w", "price_ct_kwh", "ambient_c", "cost_eur"];
    let n = trace.n_rooms;
    let per_step = n * ROOM_VARS.len() + PUMP_VARS.len();
    let header = ["controller", "step", "timestamp", "room", "variable", "value"];
    write_csv(path.as_ref(), &header, trace.records.len() * per_step, |i, row| {
        let r = &trace.records[i / per_step];
        let slot = i % per_step;
        let (room, var, value) = if slot < n * ROOM_VARS.len() {
            let (v, j) = (slot / n, slot % n);
            let value = match v {
                0 => r.air_c[j],
                1 => r.mass_c[j],
                2 => r.heat_w[j],
                3 => r.lower[j],
                4 => r.upper[j],
                _ => r.violation[j],
            };
            ((j + 1).to_string(), ROOM_VARS[v], value)
        } else {
            let v = slot - n * ROOM_VARS.len();
            let value = [r.modulation, r.power_w, r.price_ct_kwh, r.ambient_c, r.cost_eur][v];
            (String::new(), PUMP_VARS[v], value)
        };
        row.extend([
            trace.controller.to_string(),
            r.step.to_string(),
            format_timestamp(r.timestamp),
            room,
            var.to_string(),
            value.to_string(),
        ]);
    })
}
