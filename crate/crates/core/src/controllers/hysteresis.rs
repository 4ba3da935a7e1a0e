use serde::{Deserialize, Serialize};

use super::{ControlAction, ControllerContext};
use crate::error::{Error, Result};

/// Per-room two-point memory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HysteresisState {
    pub heating: Vec<bool>,
}

impl HysteresisState {
    pub fn new(n_rooms: usize) -> Self {
        Self {
            heating: vec![false; n_rooms],
        }
    }
}

/// Heats a room from its lower bound until it reaches the upper bound.
///
/// The pump runs flat out whenever any room is calling and the heat goes
/// in equal parts to the calling rooms.
pub fn hysteresis_step(
    state: &HysteresisState,
    ctx: &ControllerContext<'_>,
) -> Result<(HysteresisState, ControlAction)> {
    ctx.validate()?;
    let n = ctx.n_rooms();
    if state.heating.len() != n {
        return Err(Error::contract(format!(
            "hysteresis state tracks {} rooms, context has {n}",
            state.heating.len()
        )));
    }
    let heating: Vec<bool> = (0..n)
        .map(|j| {
            let t = ctx.prev_air_c[j];
            if t <= ctx.lower[j] {
                true
            } else if t >= ctx.upper[j] {
                false
            } else {
                state.heating[j]
            }
        })
        .collect();
    let action = if heating.iter().any(|&h| h) {
        let weights: Vec<f64> = heating.iter().map(|&h| if h { 1.0 } else { 0.0 }).collect();
        ControlAction::at_modulation(1.0, &weights, ctx.ambient_c, ctx.curve)?
    } else {
        ControlAction::zero(n)
    };
    Ok((HysteresisState { heating }, action))
}
