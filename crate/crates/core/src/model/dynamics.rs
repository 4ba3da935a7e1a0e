use nalgebra::{DMatrix, Matrix2, Matrix2x3, SMatrix, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::params::{BuildingParams, RoomParams};
use crate::error::{Error, Result};

const SANITY_MIN_C: f64 = -50.0;
const SANITY_MAX_C: f64 = 100.0;

/// Exogenous conditions over one time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExogenousSample {
    /// Ambient temperature, °C.
    pub ambient_c: f64,
    /// Global solar radiation, W/m².
    pub solar_wm2: f64,
    /// Electricity price, ct/kWh. May be negative.
    pub price_ct_kwh: f64,
}

impl ExogenousSample {
    pub fn new(ambient_c: f64, solar_wm2: f64, price_ct_kwh: f64) -> Self {
        Self {
            ambient_c,
            solar_wm2,
            price_ct_kwh,
        }
    }
}

/// Air and medium temperatures of every room at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingState {
    pub air_c: Vec<f64>,
    pub mass_c: Vec<f64>,
    pub step: usize,
}

impl BuildingState {
    pub fn uniform(n_rooms: usize, temperature_c: f64) -> Self {
        Self {
            air_c: vec![temperature_c; n_rooms],
            mass_c: vec![temperature_c; n_rooms],
            step: 0,
        }
    }

    pub fn n_rooms(&self) -> usize {
        self.air_c.len()
    }

    pub fn validate(&self, n_rooms: usize) -> Result<()> {
        if self.air_c.len() != n_rooms || self.mass_c.len() != n_rooms {
            return Err(Error::contract(format!(
                "state has {}/{} temperatures, expected {n_rooms} rooms",
                self.air_c.len(),
                self.mass_c.len()
            )));
        }
        for &t in self.air_c.iter().chain(&self.mass_c) {
            if !(SANITY_MIN_C..=SANITY_MAX_C).contains(&t) {
                return Err(Error::Numeric(format!(
                    "temperature {t} °C outside the sanity band [{SANITY_MIN_C}, {SANITY_MAX_C}]"
                )));
            }
        }
        Ok(())
    }

    /// Interleaved state vector `(T_i1, T_m1, ..., T_in, T_mn)`.
    pub fn to_vector(&self) -> Vec<f64> {
        self.air_c
            .iter()
            .zip(&self.mass_c)
            .flat_map(|(&a, &m)| [a, m])
            .collect()
    }

    pub fn from_vector(x: &[f64], step: usize) -> Self {
        Self {
            air_c: x.iter().step_by(2).copied().collect(),
            mass_c: x.iter().skip(1).step_by(2).copied().collect(),
            step,
        }
    }
}

fn check_heat(heat_w: &[f64], n: usize) -> Result<()> {
    if heat_w.len() != n {
        return Err(Error::contract(format!("{} heat flows for {n} rooms", heat_w.len())));
    }
    Ok(())
}

/// Continuous-time derivatives `(dT_i/dt, dT_m/dt)` per room, K/s.
pub fn room_derivative(
    state: &BuildingState,
    params: &BuildingParams,
    exo: &ExogenousSample,
    heat_w: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let n = params.n_rooms();
    check_heat(heat_w, n)?;
    if state.air_c.len() != n || state.mass_c.len() != n {
        return Err(Error::contract("state and parameters disagree on room count"));
    }
    if let Some(q) = heat_w.iter().find(|q| !(**q >= 0.0)) {
        return Err(Error::contract(format!("negative heat flow {q} W")));
    }
    Ok(params
        .rooms()
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let (ti, tm) = (state.air_c[j], state.mass_c[j]);
            let to_mass = (tm - ti) / r.mass_resistance;
            let to_ambient = (exo.ambient_c - ti) / r.ambient_resistance;
            let d_air = (to_mass + to_ambient + r.solar_gain * exo.solar_wm2 + heat_w[j]) / r.air_capacity;
            let d_mass = (ti - tm) / (r.mass_resistance * r.mass_capacity);
            (d_air, d_mass)
        })
        .collect())
}

/// Indoor air temperature at rest under constant inputs.
pub fn steady_state(room: &RoomParams, exo: &ExogenousSample, heat_w: f64) -> f64 {
    exo.ambient_c + room.ambient_resistance * (room.solar_gain * exo.solar_wm2 + heat_w)
}

/// Exact discrete-time form of one room under a zero-order hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomBlock {
    /// 2×2 transition on `(T_i, T_m)`.
    pub a: Matrix2<f64>,
    /// Input columns for `(Q_h [W], T_a [°C], q_s [W/m²])`.
    pub b: Matrix2x3<f64>,
}

impl RoomBlock {
    fn continuous(r: &RoomParams) -> (Matrix2<f64>, Matrix2x3<f64>) {
        let ci = r.air_capacity;
        let cm = r.mass_capacity;
        let ri = r.mass_resistance;
        let ra = r.ambient_resistance;
        let a = Matrix2::new(
            -(1.0 / ri + 1.0 / ra) / ci,
            1.0 / (ri * ci),
            1.0 / (ri * cm),
            -1.0 / (ri * cm),
        );
        let b = Matrix2x3::new(1.0 / ci, 1.0 / (ra * ci), r.solar_gain / ci, 0.0, 0.0, 0.0);
        (a, b)
    }

    fn discretize(r: &RoomParams, dt: f64) -> Result<Self> {
        let (ac, bc) = Self::continuous(r);
        // exp([[A, B], [0, 0]] dt) = [[Ad, Bd], [0, I]]
        let mut aug = SMatrix::<f64, 5, 5>::zeros();
        aug.fixed_view_mut::<2, 2>(0, 0).copy_from(&(ac * dt));
        aug.fixed_view_mut::<2, 3>(0, 2).copy_from(&(bc * dt));
        let e = aug.exp();
        let block = RoomBlock {
            a: e.fixed_view::<2, 2>(0, 0).into_owned(),
            b: e.fixed_view::<2, 3>(0, 2).into_owned(),
        };
        if !block.a.iter().chain(block.b.iter()).all(|v| v.is_finite()) {
            return Err(Error::Numeric(format!(
                "matrix exponential is not finite for room {r:?} at dt = {dt} s"
            )));
        }
        let rho = block.spectral_radius();
        if !(rho < 1.0) {
            return Err(Error::Numeric(format!(
                "discrete room model is not stable (spectral radius {rho:.6}) for {r:?} at dt = {dt} s; \
                 check capacitance and resistance magnitudes"
            )));
        }
        Ok(block)
    }

    pub fn spectral_radius(&self) -> f64 {
        let tr = self.a.trace();
        let det = self.a.determinant();
        let disc = tr * tr / 4.0 - det;
        if disc >= 0.0 {
            let s = disc.sqrt();
            (tr / 2.0 + s).abs().max((tr / 2.0 - s).abs())
        } else {
            det.sqrt()
        }
    }

    fn apply(&self, x: Vector2<f64>, heat_w: f64, exo: &ExogenousSample) -> Vector2<f64> {
        self.a * x + self.b * Vector3::new(heat_w, exo.ambient_c, exo.solar_wm2)
    }
}

/// Discrete-time building model `x[k+1] = A x[k] + B_u Q_h[k] + B_d (T_a, q_s)`.
///
/// Rooms do not exchange heat with each other, so `A` is block diagonal and
/// stored per room; the dense matrices are assembled on request.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDynamics {
    blocks: Vec<RoomBlock>,
    dt: f64,
}

impl DiscreteDynamics {
    pub fn n_rooms(&self) -> usize {
        self.blocks.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn blocks(&self) -> &[RoomBlock] {
        &self.blocks
    }

    /// Dense 2n×2n state transition matrix.
    pub fn a(&self) -> DMatrix<f64> {
        let n = self.n_rooms();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (j, b) in self.blocks.iter().enumerate() {
            m.view_mut((2 * j, 2 * j), (2, 2)).copy_from(&b.a);
        }
        m
    }

    /// Dense 2n×n heat-flow input matrix, per W.
    pub fn b_heat(&self) -> DMatrix<f64> {
        let n = self.n_rooms();
        let mut m = DMatrix::zeros(2 * n, n);
        for (j, b) in self.blocks.iter().enumerate() {
            m[(2 * j, j)] = b.b[(0, 0)];
            m[(2 * j + 1, j)] = b.b[(1, 0)];
        }
        m
    }

    /// Dense 2n×2 disturbance matrix with columns for `T_a` and `q_s`.
    pub fn b_disturbance(&self) -> DMatrix<f64> {
        let n = self.n_rooms();
        let mut m = DMatrix::zeros(2 * n, 2);
        for (j, b) in self.blocks.iter().enumerate() {
            for r in 0..2 {
                m[(2 * j + r, 0)] = b.b[(r, 1)];
                m[(2 * j + r, 1)] = b.b[(r, 2)];
            }
        }
        m
    }

    /// Free (zero heating) response offset `B_d (T_a, q_s)` per room.
    pub fn disturbance_offset(&self, exo: &ExogenousSample) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| {
                let v = b.b.fixed_view::<2, 2>(0, 1) * Vector2::new(exo.ambient_c, exo.solar_wm2);
                [v[0], v[1]]
            })
            .collect()
    }
}

/// Zero-order-hold discretization via the matrix exponential of the
/// augmented per-room system.
pub fn discretize(params: &BuildingParams, dt: f64) -> Result<DiscreteDynamics> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config(format!("time step must be positive, got {dt}")));
    }
    let blocks = params
        .rooms()
        .iter()
        .map(|r| RoomBlock::discretize(r, dt))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteDynamics { blocks, dt })
}

/// Advances the building by one step with piecewise-constant inputs.
pub fn step(
    dynamics: &DiscreteDynamics,
    state: &BuildingState,
    exo: &ExogenousSample,
    heat_w: &[f64],
) -> Result<BuildingState> {
    let n = dynamics.n_rooms();
    check_heat(heat_w, n)?;
    if state.air_c.len() != n || state.mass_c.len() != n {
        return Err(Error::contract("state and dynamics disagree on room count"));
    }
    let mut air_c = Vec::with_capacity(n);
    let mut mass_c = Vec::with_capacity(n);
    for (j, block) in dynamics.blocks.iter().enumerate() {
        let x = Vector2::new(state.air_c[j], state.mass_c[j]);
        let next = block.apply(x, heat_w[j], exo);
        air_c.push(next[0]);
        mass_c.push(next[1]);
    }
    Ok(BuildingState {
        air_c,
        mass_c,
        step: state.step + 1,
    })
}
