//! Closed-loop runs, KPIs and controller comparisons.

mod config;
mod report;
mod runner;
mod trace;

pub use config::{ControllerKind, DataSource, RunConfig, ScenarioKind, DEFAULT_ROOMS, DEFAULT_SEED, DEFAULT_WEEKS};
pub use report::{
    compare_campaign, default_grid, summarize, write_tidy_trace, CampaignReport, CellOutcome, CellSpec, Comparison,
    RunSummary, COST_UNIT_NOTE, SCHEMA_VERSION,
};
pub use runner::{
    make_controller, run, run_closed_loop, Controller, Hysteresis, Mpc, Observation, PriceOnly, PriceStorage,
};
pub use trace::{
    kpi_costs, kpi_discomfort, weekly_results, MpcStats, Trace, TraceRecord, WeeklyResult, STEPS_PER_KPI_WEEK,
};
