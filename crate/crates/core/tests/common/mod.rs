#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zoneheat::comfort::BoundsSchedule;
use zoneheat::model::{
    discretize, BuildingParams, BuildingState, DiscreteDynamics, ExogenousSample, HeatPumpCurve, ParameterSet,
    RoomParams,
};
use zoneheat::mpc::{build_problem, HorizonProblem, MpcConfig};

pub fn one_room(set: ParameterSet) -> DiscreteDynamics {
    discretize(&BuildingParams::uniform(set, 1).unwrap(), 900.0).unwrap()
}

/// Forward Euler on the continuous two-node equations of one room.
pub fn euler_room(
    room: &RoomParams,
    air: f64,
    mass: f64,
    exo: &ExogenousSample,
    heat: f64,
    h: f64,
    t: f64,
) -> (f64, f64) {
    let steps = (t / h).round() as usize;
    let (mut ti, mut tm) = (air, mass);
    for _ in 0..steps {
        let d_air = ((tm - ti) / room.mass_resistance
            + (exo.ambient_c - ti) / room.ambient_resistance
            + room.solar_gain * exo.solar_wm2
            + heat)
            / room.air_capacity;
        let d_mass = (ti - tm) / (room.mass_resistance * room.mass_capacity);
        ti += h * d_air;
        tm += h * d_mass;
    }
    (ti, tm)
}

/// Constant bounds at every instant.
pub fn flat_bounds(n_rooms: usize, instants: usize, lower: f64, upper: f64) -> BoundsSchedule {
    BoundsSchedule::from_values(
        n_rooms,
        vec![lower; n_rooms * instants],
        vec![upper; n_rooms * instants],
    )
    .unwrap()
}

/// A one-room program with `horizon` slots and the given weather and prices.
pub fn one_room_problem(
    dynamics: &DiscreteDynamics,
    air: f64,
    mass: f64,
    forecast: &[ExogenousSample],
    lower: f64,
    upper: f64,
) -> HorizonProblem {
    let cfg = MpcConfig {
        horizon_hours: forecast.len() as f64 / 4.0,
        comfort_margin: 0.0,
        ..MpcConfig::default()
    };
    let state = BuildingState {
        air_c: vec![air],
        mass_c: vec![mass],
        step: 0,
    };
    let bounds = flat_bounds(1, forecast.len() + 1, lower, upper);
    build_problem(
        &state,
        dynamics,
        forecast,
        &bounds,
        &HeatPumpCurve::reference(),
        &cfg,
        &[0.0],
    )
    .unwrap()
}

/// Objective of `u` with the cheapest admissible slacks.
pub fn penalized_objective(p: &HorizonProblem, u: &[f64]) -> f64 {
    let s = p.violations(u);
    p.objective(u, &s)
}

/// Best point of the grid `level / (levels - 1) * heat_max` over all slots.
pub fn grid_optimum(p: &HorizonProblem, levels: usize) -> (f64, Vec<f64>) {
    assert_eq!(p.n_rooms, 1);
    let n = p.horizon;
    let mut idx = vec![0usize; n];
    let mut u = vec![0.0; n];
    let mut best = (f64::INFINITY, u.clone());
    loop {
        for k in 0..n {
            u[k] = idx[k] as f64 / (levels - 1) as f64 * p.heat_max_kw[k];
        }
        let f = penalized_objective(p, &u);
        if f < best.0 {
            best = (f, u.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            idx[k] += 1;
            if idx[k] < levels {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Air temperature reached at the end of the horizon per kW held in each slot.
pub fn end_gain(p: &HorizonProblem) -> Vec<f64> {
    let zero = vec![0.0; p.horizon];
    let base = p.simulate(&zero)[p.horizon][0];
    (0..p.horizon)
        .map(|k| {
            let mut u = zero.clone();
            u[k] = 1.0;
            p.simulate(&u)[p.horizon][0] - base
        })
        .collect()
}

/// Random N-slot one-room instance whose only binding constraint is the
/// final lower bound, placed where a grid point meets it exactly.
///
/// Filling slots fully in order of price per unit of end temperature is
/// optimal for such a program, so the grid point built that way is the
/// continuous optimum as well.
pub fn on_grid_instance(
    rng: &mut ChaCha8Rng,
    dynamics: &DiscreteDynamics,
    horizon: usize,
    levels: usize,
) -> (HorizonProblem, Vec<f64>) {
    let forecast: Vec<ExogenousSample> = (0..horizon)
        .map(|_| {
            ExogenousSample::new(
                rng.random_range(-8.0..8.0),
                rng.random_range(0.0..150.0),
                rng.random_range(5.0..45.0),
            )
        })
        .collect();
    let air = rng.random_range(19.0..23.0);
    let mass = air + rng.random_range(-0.5..0.5);
    let mut p = one_room_problem(dynamics, air, mass, &forecast, 0.0, 80.0);
    let gain = end_gain(&p);
    let mut order: Vec<usize> = (0..horizon).collect();
    order.sort_by(|&a, &b| (p.heat_price[a] / gain[a]).total_cmp(&(p.heat_price[b] / gain[b])));
    let full = rng.random_range(0..horizon);
    let partial = rng.random_range(1..levels);
    let mut u = vec![0.0; horizon];
    for (rank, &k) in order.iter().enumerate() {
        if rank < full {
            u[k] = p.heat_max_kw[k];
        } else if rank == full {
            u[k] = partial as f64 / (levels - 1) as f64 * p.heat_max_kw[k];
        }
    }
    let target = p.simulate(&u)[horizon][0];
    let last = horizon - 1;
    p.lower[last] = target;
    (p, u)
}

/// Random one-room instance with comfort-style bands that may bind anywhere.
pub fn random_instance(rng: &mut ChaCha8Rng, dynamics: &DiscreteDynamics, horizon: usize) -> HorizonProblem {
    let forecast: Vec<ExogenousSample> = (0..horizon)
        .map(|_| {
            ExogenousSample::new(
                rng.random_range(-8.0..8.0),
                rng.random_range(0.0..150.0),
                rng.random_range(5.0..45.0),
            )
        })
        .collect();
    let air = rng.random_range(19.0..24.0);
    let mut p = one_room_problem(dynamics, air, air, &forecast, 16.0, 30.0);
    let bands = [(22.6, 24.0), (21.5, 25.0), (20.7, 25.8), (16.0, 30.0)];
    for k in 0..horizon {
        let (lb, ub) = *bands.choose(rng).unwrap();
        p.lower[k] = lb;
        p.upper[k] = ub;
    }
    p
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
