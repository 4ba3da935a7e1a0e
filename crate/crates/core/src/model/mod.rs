//! Building thermal model and heat pump performance.

pub mod dynamics;
pub mod heat_pump;
pub mod params;

pub use dynamics::{
    discretize, room_derivative, steady_state, step, BuildingState, DiscreteDynamics, ExogenousSample, RoomBlock,
};
pub use heat_pump::{
    heat_to_power, is_feasible_modulation, modulation_to_power, round_modulation, Breakpoint, HeatPumpCurve,
    MIN_MODULATION,
};
pub use params::{BuildingParams, Multipliers, ParameterSet, RoomParams};
