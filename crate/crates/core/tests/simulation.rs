use zoneheat::controllers::ControlAction;
use zoneheat::data::{generate_synthetic, AlignedSeries, STEPS_PER_WEEK};
use zoneheat::model::{discretize, is_feasible_modulation, step, BuildingState, ExogenousSample, HeatPumpCurve};
use zoneheat::mpc::MpcStepInfo;
use zoneheat::simulation::*;

fn calm_data(weeks: usize, ambient: f64) -> AlignedSeries {
    let mut a = generate_synthetic(weeks, 1).unwrap();
    for s in &mut a.samples {
        s.ambient_c = ambient;
        s.solar_wm2 = 0.0;
    }
    a
}

fn config(controller: ControllerKind, weeks: usize) -> RunConfig {
    RunConfig {
        controller,
        weeks,
        ..RunConfig::default()
    }
}

/// Requests `heat` in every room colder than `below`.
struct Greedy {
    heat: Vec<f64>,
    below: f64,
}

impl Controller for Greedy {
    fn kind(&self) -> ControllerKind {
        ControllerKind::Hysteresis
    }

    fn reset(&mut self) {}

    fn act(&mut self, obs: &Observation<'_>) -> zoneheat::Result<(ControlAction, Option<MpcStepInfo>)> {
        let heat: Vec<f64> = self
            .heat
            .iter()
            .zip(&obs.state.air_c)
            .map(|(&q, &t)| if t < self.below { q } else { 0.0 })
            .collect();
        let ambient = obs.forecast[0].ambient_c;
        let power = heat.iter().sum::<f64>() / obs.curve.cop(ambient);
        Ok((
            ControlAction {
                heat_w: heat,
                modulation: power / obs.curve.max_power(ambient),
                power_w: power,
            },
            None,
        ))
    }
}

#[test]
fn unheated_building_follows_its_free_response() {
    let data = calm_data(1, 3.0);
    let cfg = RunConfig {
        warmup_hours: 0,
        ..config(ControllerKind::Hysteresis, 1)
    };
    let trace = run_closed_loop(
        &cfg,
        &data,
        &mut Greedy {
            heat: vec![0.0; 5],
            below: 99.0,
        },
    )
    .unwrap();
    let dynamics = discretize(&cfg.building().unwrap(), 900.0).unwrap();
    let exo = ExogenousSample::new(3.0, 0.0, 0.0);
    let mut x = BuildingState::uniform(5, 20.0);
    for r in &trace.records {
        assert_eq!(r.air_c, x.air_c);
        assert_eq!(r.mass_c, x.mass_c);
        assert_eq!(r.cost_eur, 0.0);
        x = step(&dynamics, &x, &exo, &[0.0; 5]).unwrap();
    }
}

#[test]
fn out_of_envelope_actions_are_clamped() {
    let data = calm_data(1, 0.0);
    let cfg = config(ControllerKind::Hysteresis, 1);
    let mut greedy = Greedy {
        heat: vec![20_000.0, 0.0, 0.0, 0.0, 1.0],
        below: 23.0,
    };
    let trace = run_closed_loop(&cfg, &data, &mut greedy).unwrap();
    let curve = HeatPumpCurve::reference();
    let mut saturated = 0;
    for r in &trace.records {
        assert!(is_feasible_modulation(r.modulation));
        assert!(r.power_w <= curve.max_power(0.0) + 1e-9);
        let total = r.heat_w.iter().sum::<f64>();
        if total > 0.0 {
            assert!((total - curve.max_heat(0.0)).abs() < 1e-6);
            saturated += 1;
        }
    }
    assert!(saturated > 0);
}

#[test]
fn hysteresis_runs_at_zero_or_full_power() {
    let data = generate_synthetic(1, 42).unwrap();
    let trace = run(&config(ControllerKind::Hysteresis, 1), &data).unwrap();
    assert!(trace.records.iter().all(|r| r.modulation == 0.0 || r.modulation == 1.0));
    assert!(trace.records.iter().any(|r| r.modulation == 1.0));
}

#[test]
fn runs_are_deterministic() {
    let data = generate_synthetic(1, 42).unwrap();
    for c in [ControllerKind::Hysteresis, ControllerKind::Pc, ControllerKind::Psc] {
        let cfg = config(c, 1);
        assert_eq!(run(&cfg, &data).unwrap(), run(&cfg, &data).unwrap(), "{c}");
    }
}

#[test]
fn energy_bookkeeping_holds_every_step() {
    let data = generate_synthetic(1, 3).unwrap();
    let curve = HeatPumpCurve::reference();
    for c in [ControllerKind::Hysteresis, ControllerKind::Pc, ControllerKind::Psc] {
        let trace = run(&config(c, 1), &data).unwrap();
        assert_eq!(trace.records.len(), STEPS_PER_WEEK);
        for r in &trace.records {
            let expected = r.power_w * curve.cop(r.ambient_c);
            assert!((r.heat_w.iter().sum::<f64>() - expected).abs() <= 1e-6 * expected.max(1.0));
            assert!(r.power_w <= curve.max_power(r.ambient_c) + 1e-9);
            assert!(r.violation.iter().all(|&v| v >= 0.0));
            assert!((r.energy_kwh - r.power_w / 1000.0 * 0.25).abs() < 1e-12);
        }
    }
}

#[test]
fn weekly_costs_add_up() {
    let data = generate_synthetic(2, 42).unwrap();
    let trace = run(&config(ControllerKind::Psc, 2), &data).unwrap();
    let weeks = weekly_results(&trace).unwrap();
    assert_eq!(weeks.len(), 2);
    let sum: f64 = weeks.iter().map(|w| w.cost_eur).sum();
    assert!((sum - trace.total_cost()).abs() < 1e-9);
    assert!(kpi_costs(&trace, 2).is_err());
}

fn flat_trace(steps: usize, power_w: f64, price: f64) -> Trace {
    let data = generate_synthetic(1, 1).unwrap();
    let records = (0..steps)
        .map(|k| TraceRecord {
            step: k,
            timestamp: data.timestamp(k % data.len()),
            air_c: vec![22.0; 2],
            mass_c: vec![22.0; 2],
            heat_w: vec![0.0; 2],
            lower: vec![21.0; 2],
            upper: vec![24.0; 2],
            violation: vec![0.0; 2],
            lower_violation: vec![0.0; 2],
            modulation: 0.0,
            power_w,
            price_ct_kwh: price,
            ambient_c: 0.0,
            solar_wm2: 0.0,
            cost_eur: price * power_w / 1000.0 * 0.25 / 100.0,
            energy_kwh: power_w / 1000.0 * 0.25,
            mpc: None,
        })
        .collect();
    Trace {
        controller: ControllerKind::Hysteresis,
        n_rooms: 2,
        dt: 900.0,
        records,
    }
}

#[test]
fn cost_kpi_examples() {
    assert_eq!(kpi_costs(&flat_trace(STEPS_PER_KPI_WEEK, 0.0, 25.0), 0).unwrap(), 0.0);
    let c = kpi_costs(&flat_trace(STEPS_PER_KPI_WEEK, 1000.0, 10.0), 0).unwrap();
    assert!((c - 16.80).abs() < 1e-9, "{c}");
    let doubled = kpi_costs(&flat_trace(STEPS_PER_KPI_WEEK, 1000.0, 20.0), 0).unwrap();
    assert!((doubled - 2.0 * c).abs() < 1e-9);
}

#[test]
fn discomfort_kpi_examples() {
    let mut t = flat_trace(STEPS_PER_KPI_WEEK, 0.0, 10.0);
    assert_eq!(kpi_discomfort(&t, 0).unwrap(), 0.0);
    t.records[100].violation = vec![0.0, 1.0];
    assert!((kpi_discomfort(&t, 0).unwrap() - 1.0 / 672.0).abs() < 1e-15);
    t.records[100].violation = vec![1.0, 0.0];
    assert!((kpi_discomfort(&t, 0).unwrap() - 1.0 / 672.0).abs() < 1e-15);
}

#[test]
fn warm_up_is_replayed_but_not_recorded() {
    let data = generate_synthetic(1, 42).unwrap();
    let trace = run(&config(ControllerKind::Psc, 1), &data).unwrap();
    assert_eq!(trace.records.len(), STEPS_PER_WEEK);
    assert_eq!(trace.records[0].timestamp, data.start);
    assert!(trace.records[0].air_c.iter().all(|&t| t != 20.0));
}

#[test]
fn weekly_reset_restarts_each_week() {
    let data = generate_synthetic(2, 42).unwrap();
    let cfg = RunConfig {
        reset_weekly: true,
        ..config(ControllerKind::Psc, 2)
    };
    let reset = run(&cfg, &data).unwrap();
    let week2 = RunConfig {
        weeks: 1,
        ..config(ControllerKind::Psc, 1)
    };
    let alone = run(&week2, &data.slice(STEPS_PER_WEEK, STEPS_PER_WEEK)).unwrap();
    let tail = &reset.records[STEPS_PER_WEEK..];
    for (a, b) in tail.iter().zip(&alone.records) {
        assert_eq!(a.air_c, b.air_c);
        assert_eq!(a.heat_w, b.heat_w);
    }
    assert_eq!(tail[0].step, STEPS_PER_WEEK);
}

#[test]
fn too_little_data_is_an_error() {
    let data = generate_synthetic(1, 42).unwrap();
    let err = run(&config(ControllerKind::Psc, 2), &data).unwrap_err();
    assert_eq!(err.kind(), "data");
}

#[test]
fn short_mpc_run_keeps_rooms_in_band() {
    let data = generate_synthetic(1, 42).unwrap();
    let trace = run(&config(ControllerKind::Mpc, 1), &data).unwrap();
    let stats = trace.mpc_stats().unwrap();
    assert_eq!(stats.solves, STEPS_PER_WEEK);
    assert_eq!(stats.capped_solves, 0);
    assert!(stats.max_slack_sum <= 1e-6);
    let week = &weekly_results(&trace).unwrap()[0];
    assert_eq!(week.discomfort_k, 0.0);
    let hyst = run(&config(ControllerKind::Hysteresis, 1), &data).unwrap();
    assert!(week.cost_eur < kpi_costs(&hyst, 0).unwrap());
}

#[test]
fn campaign_records_failing_cells_and_keeps_the_rest() {
    let data = generate_synthetic(1, 42).unwrap();
    let base = RunConfig {
        rooms: 4,
        weeks: 1,
        ..RunConfig::default()
    };
    let cells: Vec<CellSpec> = default_grid()
        .into_iter()
        .filter(|c| c.controller != ControllerKind::Mpc)
        .collect();
    let report = compare_campaign(&base, &cells, &data, 2).unwrap();
    assert_eq!(report.cells.len(), 12);
    assert!(!report.all_succeeded());
    let failed: Vec<&CellOutcome> = report.failures().collect();
    assert_eq!(failed.len(), 6);
    assert!(failed.iter().all(|c| c.cell.scenario == ScenarioKind::Adaptive));
    assert!(failed.iter().all(|c| c.error_kind.as_deref() == Some("config")));
    for c in report.cells.iter().filter(|c| c.cell.scenario == ScenarioKind::Base) {
        assert!(c.summary.is_some());
    }
}

#[test]
fn campaign_results_do_not_depend_on_parallelism() {
    let data = generate_synthetic(1, 42).unwrap();
    let base = RunConfig {
        weeks: 1,
        ..RunConfig::default()
    };
    let cells: Vec<CellSpec> = default_grid()
        .into_iter()
        .filter(|c| c.controller != ControllerKind::Mpc)
        .collect();
    let one = compare_campaign(&base, &cells, &data, 1).unwrap();
    let four = compare_campaign(&base, &cells, &data, 4).unwrap();
    assert_eq!(one.to_json().unwrap(), four.to_json().unwrap());
    let order: Vec<CellSpec> = one.cells.iter().map(|c| c.cell).collect();
    assert_eq!(order, cells);
    let self_cmp = one
        .comparisons
        .iter()
        .find(|c| c.cell.controller == ControllerKind::Hysteresis)
        .unwrap();
    assert_eq!(self_cmp.cost_reduction_pct, Some(0.0));
}

#[test]
fn summaries_carry_schema_and_frozen_inputs() {
    let data = generate_synthetic(1, 42).unwrap();
    let cfg = config(ControllerKind::Psc, 1);
    let trace = run(&cfg, &data).unwrap();
    let s = summarize(&cfg, &trace).unwrap();
    assert_eq!(s.schema_version, SCHEMA_VERSION);
    assert_eq!(s.multipliers.len(), 5);
    assert_eq!(s.config.multipliers.as_deref(), Some(&s.multipliers[..]));
    let json: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
    assert_eq!(json["weeks"].as_array().unwrap().len(), 1);
    assert_eq!(json["schema_version"], SCHEMA_VERSION);
    let dir = tempfile::tempdir().unwrap();
    trace.write_csv(dir.path().join("trace.csv")).unwrap();
    write_tidy_trace(&trace, dir.path().join("tidy.csv")).unwrap();
    let lines = std::fs::read_to_string(dir.path().join("trace.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(lines, STEPS_PER_WEEK + 1);
}
