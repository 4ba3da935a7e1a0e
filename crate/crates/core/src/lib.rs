//! Multi-zone RC building simulation with rule-based and receding-horizon
//! heat pump controllers, driven by weather and day-ahead prices.
//!
//! The guide in `book/` walks through the modules in order; its code blocks
//! run as doc-tests of this crate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comfort;
pub mod controllers;
pub mod data;
pub mod error;
pub mod model;
pub mod mpc;
pub mod simulation;

pub use error::{DataError, Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/building-model.md")]
    mod building_model {}
    #[doc = include_str!("../../../book/src/comfort.md")]
    mod comfort {}
    #[doc = include_str!("../../../book/src/heuristics.md")]
    mod heuristics {}
    #[doc = include_str!("../../../book/src/mpc.md")]
    mod mpc {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
