mod common;

use common::euler_room;
use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;
use zoneheat::model::{
    discretize, steady_state, step, BuildingParams, BuildingState, ExogenousSample, HeatPumpCurve, Multipliers,
    ParameterSet, RoomParams,
};

fn room_state(air: f64, mass: f64) -> BuildingState {
    BuildingState {
        air_c: vec![air],
        mass_c: vec![mass],
        step: 0,
    }
}

fn run(set: ParameterSet, dt: f64, x: BuildingState, exo: &ExogenousSample, heat: f64, steps: usize) -> BuildingState {
    let dynamics = discretize(&BuildingParams::uniform(set, 1).unwrap(), dt).unwrap();
    (0..steps).fold(x, |s, _| step(&dynamics, &s, exo, &[heat]).unwrap())
}

#[test]
fn free_response_matches_fine_euler() {
    let exo = ExogenousSample::new(0.0, 0.0, 0.0);
    for set in ParameterSet::ALL {
        let zoh = run(set, 900.0, room_state(20.0, 20.0), &exo, 0.0, 96);
        let (ti, tm) = euler_room(&set.room(), 20.0, 20.0, &exo, 0.0, 0.9, 86_400.0);
        assert!((zoh.air_c[0] - ti).abs() < 1e-3, "{set:?}: {} vs {ti}", zoh.air_c[0]);
        assert!((zoh.mass_c[0] - tm).abs() < 1e-3, "{set:?}: {} vs {tm}", zoh.mass_c[0]);
    }
}

#[test]
fn forced_response_matches_fine_euler() {
    let exo = ExogenousSample::new(-3.0, 120.0, 0.0);
    for set in ParameterSet::ALL {
        let zoh = run(set, 900.0, room_state(21.0, 19.0), &exo, 1500.0, 24);
        let (ti, tm) = euler_room(&set.room(), 21.0, 19.0, &exo, 1500.0, 0.9, 6.0 * 3600.0);
        assert!((zoh.air_c[0] - ti).abs() < 1e-3, "{set:?}: {} vs {ti}", zoh.air_c[0]);
        assert!((zoh.mass_c[0] - tm).abs() < 1e-3);
    }
}

#[test]
fn half_steps_chain_to_a_full_step() {
    let exo = ExogenousSample::new(4.0, 250.0, 0.0);
    for set in ParameterSet::ALL {
        let one = run(set, 900.0, room_state(22.0, 18.5), &exo, 800.0, 1);
        let two = run(set, 450.0, room_state(22.0, 18.5), &exo, 800.0, 2);
        assert!((one.air_c[0] - two.air_c[0]).abs() < 1e-9);
        assert!((one.mass_c[0] - two.mass_c[0]).abs() < 1e-9);
    }
}

#[test]
fn discrete_fixed_point_is_the_closed_form() {
    let exo = ExogenousSample::new(2.0, 40.0, 0.0);
    let heat = 250.0;
    for set in ParameterSet::ALL {
        let dynamics = discretize(&BuildingParams::uniform(set, 1).unwrap(), 900.0).unwrap();
        let blk = dynamics.blocks()[0];
        let forcing = blk.b * nalgebra::Vector3::new(heat, exo.ambient_c, exo.solar_wm2);
        let fixed = (Matrix2::identity() - blk.a).try_inverse().unwrap() * forcing;
        let expected = steady_state(&set.room(), &exo, heat);
        assert!((fixed[0] - expected).abs() < 1e-8, "{} vs {expected}", fixed[0]);
        assert!((fixed[1] - expected).abs() < 1e-8);
    }
}

#[test]
fn held_input_converges_at_the_slow_rate() {
    let exo = ExogenousSample::new(2.0, 0.0, 0.0);
    let heat = 280.0;
    for set in ParameterSet::ALL {
        let target = steady_state(&set.room(), &exo, heat);
        let dynamics = discretize(&BuildingParams::uniform(set, 1).unwrap(), 900.0).unwrap();
        let rho = dynamics.blocks()[0].spectral_radius();
        let mut x = room_state(20.0, 20.0);
        let gap0 = (x.air_c[0] - target).abs();
        for _ in 0..96 * 14 {
            x = step(&dynamics, &x, &exo, &[heat]).unwrap();
        }
        let gap = (x.air_c[0] - target).abs();
        // the fast mode is long gone; what is left decays with the slow eigenvalue
        let predicted = gap0 * rho.powi(96 * 14);
        assert!(
            (gap - predicted).abs() < 0.02 * predicted + 1e-6,
            "{set:?}: {gap} vs {predicted}"
        );
        for _ in 0..96 * 200 {
            x = step(&dynamics, &x, &exo, &[heat]).unwrap();
        }
        assert!((x.air_c[0] - target).abs() < 1e-6);
        assert!((x.mass_c[0] - target).abs() < 1e-6);
    }
}

#[test]
fn superposition_holds() {
    let params = BuildingParams::perturbed(ParameterSet::Low, Multipliers::seeded(3, 1)).unwrap();
    let dynamics = discretize(&params, 900.0).unwrap();
    let x = BuildingState {
        air_c: vec![21.0, 19.5, 23.0],
        mass_c: vec![20.0, 20.5, 22.0],
        step: 0,
    };
    let zero = BuildingState::uniform(3, 0.0);
    let exo = ExogenousSample::new(5.0, 80.0, 0.0);
    let calm = ExogenousSample::new(0.0, 0.0, 0.0);
    let (u1, u2) = ([300.0, 0.0, 1200.0], [50.0, 900.0, 10.0]);
    let sum: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| a + b).collect();
    let lhs_a = step(&dynamics, &x, &exo, &sum).unwrap();
    let lhs_b = step(&dynamics, &x, &exo, &u1).unwrap();
    let rhs_a = step(&dynamics, &zero, &calm, &u2).unwrap();
    let rhs_b = step(&dynamics, &zero, &calm, &[0.0; 3]).unwrap();
    for j in 0..3 {
        let l = lhs_a.air_c[j] - lhs_b.air_c[j];
        let r = rhs_a.air_c[j] - rhs_b.air_c[j];
        assert!((l - r).abs() < 1e-12, "{l} vs {r}");
    }
}

#[test]
fn heat_pump_envelopes_are_consistent() {
    let curve = HeatPumpCurve::reference();
    for t in [-15.0, -10.0, -3.3, 2.0, 7.0, 12.5, 20.0, 30.0] {
        let heat = zoneheat::model::modulation_to_power(1.0, curve.max_power(t)).unwrap() * curve.cop(t);
        assert!((heat - curve.max_heat(t)).abs() < 1e-9);
        assert!((zoneheat::model::heat_to_power(heat, curve.cop(t)).unwrap() - curve.max_power(t)).abs() < 1e-9);
    }
}

fn room_strategy() -> impl Strategy<Value = RoomParams> {
    (
        0.95..1.05f64,
        0.95..1.05f64,
        0.95..1.05f64,
        0.95..1.05f64,
        0.95..1.05f64,
        prop::bool::ANY,
    )
        .prop_map(|(a, b, c, d, e, high)| {
            let base = if high { ParameterSet::High } else { ParameterSet::Low }.room();
            base.scaled(&Multipliers {
                air_capacity: a,
                mass_capacity: b,
                mass_resistance: c,
                ambient_resistance: d,
                solar_gain: e,
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn more_heat_never_cools(room in room_strategy(), air in 10.0..30.0f64, mass in 10.0..30.0f64,
                             ambient in -15.0..15.0f64, solar in 0.0..400.0f64,
                             q in 0.0..8000.0f64, extra in 0.0..8000.0f64) {
        let params = BuildingParams::new(vec![room], vec![Multipliers::IDENTITY]).unwrap();
        let dynamics = discretize(&params, 900.0).unwrap();
        let exo = ExogenousSample::new(ambient, solar, 0.0);
        let x = room_state(air, mass);
        let low = step(&dynamics, &x, &exo, &[q]).unwrap();
        let high = step(&dynamics, &x, &exo, &[q + extra]).unwrap();
        prop_assert!(high.air_c[0] >= low.air_c[0]);
        prop_assert!(high.mass_c[0] >= low.mass_c[0]);
    }

    #[test]
    fn unheated_rooms_relax_toward_ambient(room in room_strategy(), air in -10.0..40.0f64,
                                           mass in -10.0..40.0f64, ambient in -15.0..15.0f64) {
        let params = BuildingParams::new(vec![room], vec![Multipliers::IDENTITY]).unwrap();
        let dynamics = discretize(&params, 900.0).unwrap();
        let exo = ExogenousSample::new(ambient, 0.0, 0.0);
        let mut x = room_state(air, mass);
        let mut dev = (x.air_c[0] - ambient).abs().max((x.mass_c[0] - ambient).abs());
        for _ in 0..48 {
            x = step(&dynamics, &x, &exo, &[0.0]).unwrap();
            let next = (x.air_c[0] - ambient).abs().max((x.mass_c[0] - ambient).abs());
            prop_assert!(next <= dev + 1e-12);
            dev = next;
        }
    }

    #[test]
    fn discrete_blocks_are_passive(room in room_strategy()) {
        let params = BuildingParams::new(vec![room], vec![Multipliers::IDENTITY]).unwrap();
        let dynamics = discretize(&params, 900.0).unwrap();
        let a = dynamics.blocks()[0].a;
        prop_assert!(a.iter().all(|&v| v >= 0.0));
        let sums = a * Vector2::new(1.0, 1.0);
        prop_assert!(sums[0] <= 1.0 && sums[1] <= 1.0 + 1e-12);
        prop_assert!(dynamics.blocks()[0].spectral_radius() < 1.0);
    }
}
